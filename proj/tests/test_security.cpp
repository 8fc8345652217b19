#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "sspsec/model.hpp"
#include "sspsec/rng.hpp"
#include "sspsec/security.hpp"

using namespace sspsec;

namespace {
AttackPlan scaled_plan(const AllocationMatrix& omega, RandomStream& rng, double cap) {
    AttackPlan alpha(omega.validators(), omega.ssps());
    for (std::size_t j = 0; j < omega.ssps(); ++j) {
        const double scale = rng.uniform(0.0, cap);
        for (std::size_t i = 0; i < omega.validators(); ++i) {
            alpha(i, j) = omega(i, j) * scale;
        }
    }
    return alpha;
}
}  // namespace

TEST_CASE("weak security boundary is inclusive") {
    const EconomicParams at_boundary(100000.0, 1.0 / 3.0, 0.0);
    const auto secure = weak_security(300000.0, at_boundary);
    CHECK(secure.secure);
    CHECK(secure.margin == 0.0);
    CHECK(secure.binding == BindingConstraint::weak_threshold);

    const EconomicParams above(100001.0, 1.0 / 3.0, 0.0);
    CHECK_FALSE(weak_security(300000.0, above).secure);

    const EconomicParams free_ride(0.0, 1.0 / 3.0, 0.0);
    CHECK(weak_security(0.001, free_ride).secure);

    CHECK_THROWS_AS(weak_security(0.0, at_boundary), std::invalid_argument);
}

TEST_CASE("strong security requires a strict average advantage") {
    AttackPlan alpha(1, 2);
    alpha(0, 0) = 10.0;
    alpha(0, 1) = 20.0;

    const EconomicParams close(18.0, 0.5, 0.0, 10.0);
    const auto verdict = strong_security(alpha, close, 2);
    CHECK(verdict.secure);
    CHECK(verdict.margin == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(verdict.binding == BindingConstraint::strong_average);

    const EconomicParams boundary(20.0, 0.5, 0.0, 10.0);
    CHECK_FALSE(strong_security(alpha, boundary, 2).secure);

    const EconomicParams flooded(20.0, 0.5, 0.0, 1e12);
    CHECK(strong_security(alpha, flooded, 2).secure);

    CHECK_THROWS_AS(strong_security(alpha, close, 0), std::invalid_argument);
}

TEST_CASE("validator bound follows the strict count inequality") {
    SECTION("interior bound") {
        const EconomicParams params(100.0, 1.0 / 3.0, 1.0 / 6.0);
        const auto b = validator_bound(1000.0, params);
        CHECK_FALSE(b.unbounded);
        CHECK(b.raw_bound == 5.0);
        CHECK(b.max_n == 4);
    }
    SECTION("integer boundary is excluded") {
        const EconomicParams params(125.0, 1.0 / 3.0, 1.0 / 6.0);
        const auto b = validator_bound(1000.0, params);
        CHECK(b.raw_bound == 4.0);
        CHECK(b.max_n == 3);
    }
    SECTION("profit exceeding the numerator leaves no room") {
        const EconomicParams params(600.0, 1.0 / 3.0, 1.0 / 6.0);
        CHECK(validator_bound(1000.0, params).max_n == 0);
    }
    SECTION("zero profit is unbounded") {
        const EconomicParams params(0.0, 1.0 / 3.0, 1.0 / 6.0);
        CHECK(validator_bound(1000.0, params).unbounded);
    }
}

TEST_CASE("minimum attack cost per model") {
    const AllocationMatrix omega({{30.0, 30.0}, {20.0, 20.0}});
    const EconomicParams params(1.0, 1.0 / 3.0, 0.0);

    const auto shared = min_attack_cost(omega, params, ModelKind::shared());
    CHECK(shared.min_cost == Catch::Approx(100.0 / 3.0).epsilon(1e-12));
    CHECK_FALSE(shared.degenerate);

    const auto isolated = min_attack_cost(omega, params, ModelKind::isolated());
    CHECK(isolated.min_cost == Catch::Approx(50.0 / 3.0).epsilon(1e-12));
    REQUIRE(isolated.weakest_ssp.has_value());
    CHECK(*isolated.weakest_ssp == 0);
    REQUIRE(isolated.per_ssp_costs.size() == 2);
    CHECK(isolated.per_ssp_costs[0] == isolated.per_ssp_costs[1]);

    const auto single = min_attack_cost(omega, params, ModelKind::single(0));
    CHECK(single.min_cost == isolated.min_cost);

    // equal columns: the isolated cost is the shared cost divided by k
    CHECK(isolated.min_cost == Catch::Approx(shared.min_cost / 2.0).epsilon(1e-12));
}

TEST_CASE("degenerate zero column flags instead of failing") {
    const AllocationMatrix omega({{30.0, 0.0}, {20.0, 0.0}});
    const EconomicParams params(1.0, 1.0 / 3.0, 0.0);
    const auto isolated = min_attack_cost(omega, params, ModelKind::isolated());
    CHECK(isolated.min_cost == 0.0);
    CHECK(isolated.degenerate);
    const auto single = min_attack_cost(omega, params, ModelKind::single(1));
    CHECK(single.min_cost == 0.0);
    CHECK(single.degenerate);
}

TEST_CASE("cost ordering holds for every feasible allocation and pool choice") {
    RandomStream rng(0x5ecu, 0);
    const EconomicParams params(1.0, 1.0 / 3.0, 0.0);
    for (int rep = 0; rep < 300; ++rep) {
        const auto omega = oracle::random_allocation(rng, 1 + rng.uniform_index(10),
                                                     1 + rng.uniform_index(6), 1.0, 100.0);
        const double shared = min_attack_cost(omega, params, ModelKind::shared()).min_cost;
        const double isolated = min_attack_cost(omega, params, ModelKind::isolated()).min_cost;
        for (std::size_t j0 = 0; j0 < omega.ssps(); ++j0) {
            const double single = min_attack_cost(omega, params, ModelKind::single(j0)).min_cost;
            CHECK(shared >= single);
            CHECK(single >= isolated);
        }
    }
}

TEST_CASE("tightened threshold is the weakest pool's cost") {
    const EconomicParams params(1.0, 1.0 / 3.0, 0.0);
    const AllocationMatrix even({{25.0, 25.0}, {25.0, 25.0}});
    CHECK(tightened_threshold(even, params) == Catch::Approx(50.0 / 3.0).epsilon(1e-12));

    const AllocationMatrix skewed({{10.0, 90.0}});
    CHECK(tightened_threshold(skewed, params) == Catch::Approx(10.0 / 3.0).epsilon(1e-12));

    const AllocationMatrix one_pool(std::vector<std::vector<double>>{{60.0}, {40.0}});
    const double theta_delta = params.theta * 100.0;
    CHECK(tightened_threshold(one_pool, params) == theta_delta);
}

TEST_CASE("security level is theta times the weakest entry") {
    CHECK(security_level({50.0, 50.0}, 1.0 / 3.0) == Catch::Approx(50.0 / 3.0).epsilon(1e-12));
    CHECK(security_level({10.0, 0.0, 90.0}, 1.0 / 3.0) == 0.0);
    CHECK_THROWS_AS(security_level({}, 1.0 / 3.0), std::invalid_argument);
    CHECK_THROWS_AS(security_level({-1.0, 2.0}, 1.0 / 3.0), std::invalid_argument);
}

TEST_CASE("security level is concave") {
    RandomStream rng(0xc0ffeeu, 0);
    const double theta = 1.0 / 3.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t k = 1 + rng.uniform_index(8);
        std::vector<double> x(k), y(k), mix(k);
        for (std::size_t j = 0; j < k; ++j) {
            x[j] = rng.uniform(0.0, 100.0);
            y[j] = rng.uniform(0.0, 100.0);
        }
        const double lambda = rng.uniform();
        for (std::size_t j = 0; j < k; ++j) {
            mix[j] = lambda * x[j] + (1.0 - lambda) * y[j];
        }
        const double lhs = security_level(mix, theta);
        const double rhs = lambda * security_level(x, theta) +
                           (1.0 - lambda) * security_level(y, theta);
        CHECK(lhs >= rhs - 1e-12 * std::max(1.0, std::fabs(rhs)));
    }
}

TEST_CASE("non-capture keeps the committed stake under the weak threshold") {
    RandomStream rng(0x1e44u, 0);
    for (int rep = 0; rep < 300; ++rep) {
        const auto omega = oracle::random_allocation(rng, 1 + rng.uniform_index(10),
                                                     1 + rng.uniform_index(5), 1.0, 100.0);
        const double theta = rng.uniform(0.1, 0.9);
        const double r = rng.uniform(0.0, 0.5);
        // scale each column strictly below theta so no pool is captured
        const auto alpha = scaled_plan(omega, rng, theta * 0.999);
        double committed = 0.0;
        for (std::size_t i = 0; i < omega.validators(); ++i) {
            for (std::size_t j = 0; j < omega.ssps(); ++j) {
                committed += alpha(i, j);
            }
        }
        const double delta = total_stake(omega);
        const double n = static_cast<double>(omega.validators());
        CHECK((theta + r) * delta / n > (committed + r * delta) / n);
    }
}

TEST_CASE("weak security leaves no profitable attack window") {
    RandomStream rng(0xacedu, 0);
    for (int rep = 0; rep < 500; ++rep) {
        const double delta = rng.uniform(1.0, 1e6);
        const double theta = rng.uniform(0.05, 0.95);
        const double pi = rng.uniform(0.0, theta * delta);
        const EconomicParams params(pi, theta, 0.0);
        REQUIRE(weak_security(delta, params).secure);
        // profitability needs theta * delta < committed < pi; the interval is empty
        CHECK(params.pi <= params.theta * delta);
    }
}

TEST_CASE("secure verdicts carry nonnegative margins") {
    RandomStream rng(0xdadu, 0);
    for (int rep = 0; rep < 300; ++rep) {
        const double delta = rng.uniform(1.0, 1e6);
        const EconomicParams params(rng.uniform(0.0, 1e6), rng.uniform(0.05, 0.95), 0.0);
        const auto v = weak_security(delta, params);
        CHECK(v.secure == (v.margin >= 0.0));
    }
}

TEST_CASE("single-pool default picks the largest pool") {
    const AllocationMatrix omega({{10.0, 50.0, 20.0}});
    CHECK(default_single_pool(omega) == 1);
    const AllocationMatrix tie({{30.0, 30.0}});
    CHECK(default_single_pool(tie) == 0);
}
