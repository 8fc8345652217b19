#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "sspsec/allocation.hpp"
#include "sspsec/model.hpp"
#include "sspsec/rng.hpp"
#include "sspsec/security.hpp"

using namespace sspsec;

TEST_CASE("maximin allocation equalizes all pools") {
    const StakeTable sigma({60.0, 40.0});
    const auto omega = maximin_allocate(sigma, 2);
    CHECK(ssp_stake(omega, 0) == 50.0);
    CHECK(ssp_stake(omega, 1) == 50.0);
    CHECK(validate_allocation(omega, sigma).feasible());

    const auto identity = maximin_allocate(sigma, 1);
    CHECK(identity(0, 0) == 60.0);
    CHECK(identity(1, 0) == 40.0);

    CHECK_THROWS_AS(maximin_allocate(sigma, 0), std::invalid_argument);
}

TEST_CASE("maximin objective equals the closed form and dominates random rivals") {
    RandomStream rng(0x600du, 0);
    const double theta = 1.0 / 3.0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 1 + rng.uniform_index(12);
        const std::size_t k = 1 + rng.uniform_index(6);
        std::vector<double> sig(n);
        for (auto& s : sig) {
            s = rng.uniform(1.0, 100.0);
        }
        const StakeTable sigma(sig);
        const auto best = maximin_allocate(sigma, k);
        const double delta = sigma.total();
        const double closed_form = equilibrium_min_cost(delta, k, theta);
        CHECK(closed_form == theta * delta / static_cast<double>(k));
        CHECK(security_level(best.column_sums(), theta) ==
              Catch::Approx(closed_form).epsilon(1e-12));

        for (int rival = 0; rival < 20; ++rival) {
            AllocationMatrix other(n, k);
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<double> w(k);
                double s = 0.0;
                for (auto& v : w) {
                    v = rng.exponential();
                    s += v;
                }
                double partial = 0.0;
                for (std::size_t j = 0; j + 1 < k; ++j) {
                    other(i, j) = sig[i] * (w[j] / s);
                    partial += other(i, j);
                }
                other(i, k - 1) = std::max(0.0, sig[i] - partial);
            }
            CHECK(closed_form >= security_level(other.column_sums(), theta) -
                                     1e-12 * std::max(1.0, closed_form));
        }
    }
}

TEST_CASE("iterative equalizer converges on the two-pool split") {
    const AllocationMatrix start({{60.0, 0.0}, {0.0, 40.0}});
    const auto done = equalize_iterative(start, default_equalize_iters(start),
                                         default_equalize_tol(start));
    CHECK(ssp_stake(done, 0) == Catch::Approx(50.0).epsilon(1e-9));
    CHECK(ssp_stake(done, 1) == Catch::Approx(50.0).epsilon(1e-9));
    CHECK(validate_allocation(done, implied_stakes(start)).feasible());
}

TEST_CASE("equalizer leaves settled inputs untouched") {
    const AllocationMatrix even({{25.0, 25.0}, {25.0, 25.0}});
    const auto out = equalize_iterative(even, 100, default_equalize_tol(even));
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(out(i, j) == even(i, j));
        }
    }

    const AllocationMatrix skew({{60.0, 0.0}, {0.0, 40.0}});
    const auto lazy = equalize_iterative(skew, 100, total_stake(skew));
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(lazy(i, j) == skew(i, j));
        }
    }
}

TEST_CASE("equalizer preserves feasibility and never weakens the weakest pool") {
    RandomStream rng(0xf00du, 0);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 2 + rng.uniform_index(8);
        const std::size_t k = 2 + rng.uniform_index(4);
        std::vector<double> sig;
        const auto start = oracle::random_allocation(rng, n, k, 1.0, 100.0, &sig);
        const StakeTable sigma(sig);
        double prev_min = security_level(start.column_sums(), 1.0);
        for (std::size_t iters = 1; iters <= 40; iters += 4) {
            const auto step = equalize_iterative(start, iters, 0.0);
            CHECK(validate_allocation(step, sigma).feasible());
            const double now = security_level(step.column_sums(), 1.0);
            CHECK(now >= prev_min - 1e-9 * std::max(1.0, now));
            prev_min = std::max(prev_min, now);
        }
    }
}

TEST_CASE("equalizer rejects infeasible input") {
    AllocationMatrix bad(1, 2);
    bad(0, 0) = -1.0;
    bad(0, 1) = 2.0;
    CHECK_THROWS_AS(equalize_iterative(bad, 10, 0.0), std::invalid_argument);
}

TEST_CASE("equilibrium check diagnoses spread and utility invariance") {
    const EconomicParams params(1.0, 1.0 / 3.0, 0.1);

    SECTION("uniform allocation is an equilibrium") {
        const StakeTable sigma({60.0, 40.0});
        const auto omega = uniform_allocation(sigma, 2);
        const auto report = equilibrium_check(omega, sigma, params, 200);
        CHECK(report.equalized);
        CHECK(report.delta_spread == 0.0);
        CHECK(report.utility_invariant);
        CHECK(report.deviation_gain <= 1e-9 * sigma.total());
        CHECK(report.min_cost == Catch::Approx(params.theta * 50.0).epsilon(1e-12));
    }
    SECTION("skewed columns are reported") {
        const AllocationMatrix omega({{10.0, 90.0}});
        const auto report = equilibrium_check(omega, implied_stakes(omega), params, 50);
        CHECK_FALSE(report.equalized);
        CHECK(report.delta_spread == 80.0);
        CHECK(report.utility_invariant);
    }
    SECTION("utility invariance holds for any feasible allocation") {
        RandomStream rng(0xbeefu, 0);
        for (int rep = 0; rep < 50; ++rep) {
            const std::size_t n = 1 + rng.uniform_index(8);
            const std::size_t k = 1 + rng.uniform_index(5);
            std::vector<double> sig;
            const auto omega = oracle::random_allocation(rng, n, k, 1.0, 100.0, &sig);
            const auto report = equilibrium_check(omega, StakeTable(sig), params, 50,
                                                  0x5eed0u + rep);
            CHECK(report.utility_invariant);
        }
    }
}

TEST_CASE("equilibrium minimum cost closed form") {
    CHECK(equilibrium_min_cost(100.0, 2, 1.0 / 3.0) ==
          Catch::Approx(50.0 / 3.0).epsilon(1e-12));
    const double theta_delta = (1.0 / 3.0) * 100.0;
    CHECK(equilibrium_min_cost(100.0, 1, 1.0 / 3.0) == theta_delta);
    CHECK_THROWS_AS(equilibrium_min_cost(100.0, 0, 1.0 / 3.0), std::invalid_argument);

    RandomStream rng(0x11u, 0);
    for (int rep = 0; rep < 100; ++rep) {
        const double delta = rng.uniform(1.0, 1e6);
        const std::size_t k = 1 + rng.uniform_index(10);
        const double theta = rng.uniform(0.05, 0.95);
        CHECK(equilibrium_min_cost(2.0 * delta, k, theta) ==
              2.0 * equilibrium_min_cost(delta, k, theta));
    }
}

TEST_CASE("proportional chain utility reduces to the rate times own stake") {
    const EconomicParams params(1.0, 1.0 / 3.0, 0.07);
    RandomStream rng(0x777u, 0);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + rng.uniform_index(10);
        const std::size_t k = 1 + rng.uniform_index(6);
        std::vector<double> sig;
        const auto omega = oracle::random_allocation(rng, n, k, 1.0, 100.0, &sig);
        const StakeTable sigma(sig);
        const double reward_total = params.total_reward(sigma.total());
        for (std::size_t i = 0; i < n; ++i) {
            const double chained =
                sspsec::detail::proportional_chain_utility(i, omega, reward_total);
            CHECK(chained == Catch::Approx(honest_utility(i, sigma, params)).epsilon(1e-9));
        }
    }
}
