#pragma once

// Maximin stake allocation and market-equilibrium checks. The optimum of
// max_omega min_j Delta_j over the feasible set is attained when all pool
// stakes are equal, so the closed-form solver is an even split; the
// iterative equalizer realizes the exchange argument (move stake from the
// strongest pool to the weakest) as testable code and is the hook for
// future per-entry bound constraints.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sspsec/model.hpp"
#include "sspsec/rng.hpp"
#include "sspsec/security.hpp"

namespace sspsec {

// Closed-form maximin allocation: omega(i, j) = sigma(i) / k. Every column
// sum equals Delta / k, the optimum of theta * min_j Delta_j.
inline AllocationMatrix maximin_allocate(const StakeTable& sigma, std::size_t k) {
    return uniform_allocation(sigma, k);
}

// Attack cost at the maximin optimum: C* = theta * Delta / k.
inline double equilibrium_min_cost(double delta, std::size_t k, double theta) {
    if (k == 0) {
        throw std::invalid_argument("equilibrium cost needs k >= 1 SSPs");
    }
    return theta * delta / static_cast<double>(k);
}

namespace detail {

// One exchange step: route half the current max-min spread from the
// strongest column to the weakest, through the validator with the largest
// entry in the donor column. Returns false once the spread is within tol.
inline bool equalize_step(AllocationMatrix& omega, double tol) {
    const auto deltas = omega.column_sums();
    std::size_t lo = 0;
    std::size_t hi = 0;
    for (std::size_t j = 1; j < deltas.size(); ++j) {
        if (deltas[j] < deltas[lo]) {
            lo = j;
        }
        if (deltas[j] > deltas[hi]) {
            hi = j;
        }
    }
    const double spread = deltas[hi] - deltas[lo];
    if (spread <= tol) {
        return false;
    }
    std::size_t donor = 0;
    for (std::size_t i = 1; i < omega.validators(); ++i) {
        if (omega(i, hi) > omega(donor, hi)) {
            donor = i;
        }
    }
    const double moved = std::min(spread / 2.0, omega(donor, hi));
    omega(donor, hi) -= moved;
    omega(donor, lo) += moved;
    return moved > 0.0;
}

}  // namespace detail

// Iterative equalization of pool stakes. Feasibility is preserved at every
// step (stake only moves within a validator's row) and min_j Delta_j never
// decreases. Stops once max_j Delta_j - min_j Delta_j <= tol or after
// max_iters steps.
inline AllocationMatrix equalize_iterative(const AllocationMatrix& omega0,
                                           std::size_t max_iters, double tol) {
    require_feasible(omega0, implied_stakes(omega0));
    AllocationMatrix omega = omega0;
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        if (!detail::equalize_step(omega, tol)) {
            break;
        }
    }
    return omega;
}

inline std::size_t default_equalize_iters(const AllocationMatrix& omega) {
    return 10 * omega.validators() * omega.ssps();
}

inline double default_equalize_tol(const AllocationMatrix& omega) {
    return kFeasibilityTol * total_stake(omega);
}

// Equilibrium diagnosis of an allocation:
//   equalized          pool stakes agree within tolerance
//   delta_spread       max_j Delta_j - min_j Delta_j
//   min_cost           theta * min_j Delta_j
//   utility_invariant  honest utilities unchanged under probed reallocations
//   deviation_gain     best unilateral utility improvement found (>= 0)
struct EquilibriumReport {
    bool equalized = false;
    double delta_spread = 0.0;
    double min_cost = 0.0;
    bool utility_invariant = true;
    double deviation_gain = 0.0;
};

namespace detail {

// Per-SSP proportional reward chain: R_j = (Delta_j / Delta) * R split
// within each pool by allocated stake. Zero pools carry zero reward.
inline double proportional_chain_utility(std::size_t i, const AllocationMatrix& omega,
                                         double reward_total) {
    const auto deltas = omega.column_sums();
    double delta = 0.0;
    for (double d : deltas) {
        delta += d;
    }
    double utility = 0.0;
    for (std::size_t j = 0; j < omega.ssps(); ++j) {
        if (deltas[j] > 0.0) {
            const double pool_reward = deltas[j] / delta * reward_total;
            utility += omega(i, j) / deltas[j] * pool_reward;
        }
    }
    return utility;
}

}  // namespace detail

inline EquilibriumReport equilibrium_check(const AllocationMatrix& omega,
                                           const StakeTable& sigma,
                                           const EconomicParams& params, std::size_t probes,
                                           std::uint64_t seed = 0x0ddba11) {
    require_feasible(omega, sigma);
    const auto deltas = omega.column_sums();
    const auto [lo, hi] = std::minmax_element(deltas.begin(), deltas.end());

    EquilibriumReport report;
    report.delta_spread = *hi - *lo;
    report.min_cost = params.theta * *lo;
    const double delta = total_stake(omega);
    report.equalized = report.delta_spread <= kFeasibilityTol * std::max(1.0, delta);

    const double reward_total = params.total_reward(delta);
    RandomStream rng(seed, 0);
    for (std::size_t p = 0; p < probes; ++p) {
        const std::size_t i = rng.uniform_index(omega.validators());
        const double before = detail::proportional_chain_utility(i, omega, reward_total);

        // move a random fraction of one entry to another pool in the same row
        AllocationMatrix probe = omega;
        const std::size_t from = rng.uniform_index(omega.ssps());
        const std::size_t to = rng.uniform_index(omega.ssps());
        const double moved = probe(i, from) * rng.uniform();
        probe(i, from) -= moved;
        probe(i, to) += moved;

        const double after = detail::proportional_chain_utility(i, probe, reward_total);
        const double gain = after - before;
        report.deviation_gain = std::max(report.deviation_gain, gain);
        if (detail::relative_gap(after, before) > kFeasibilityTol) {
            report.utility_invariant = false;
        }
    }
    return report;
}

}  // namespace sspsec
