#pragma once

// Security definitions and bounds: the weak and strong security conditions,
// the validator-count bound, minimum attack costs per architecture, and the
// tightened threshold the isolated model imposes.
//
// Inequality strictness mirrors the source definitions: the weak condition
// is non-strict (pi <= theta * Delta is still secure), the strong condition
// and the validator bound are strict.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sspsec/model.hpp"

namespace sspsec {

enum class BindingConstraint { weak_threshold, strong_average, per_ssp_min };

struct SecurityVerdict {
    bool secure = false;
    double margin = 0.0;  // slack against the binding constraint, sign = direction
    BindingConstraint binding = BindingConstraint::weak_threshold;
};

// Weak security: the attack profit does not exceed the cost of capturing the
// threshold fraction of total stake. Secure iff pi <= theta * Delta.
inline SecurityVerdict weak_security(double delta, const EconomicParams& params) {
    if (!(delta > 0.0)) {
        throw std::invalid_argument("weak security needs total stake Delta > 0");
    }
    SecurityVerdict v;
    v.binding = BindingConstraint::weak_threshold;
    v.margin = params.theta * delta - params.pi;
    v.secure = params.pi <= params.theta * delta;
    return v;
}

// Strong security: the average per-validator incentive (committed attack
// stake plus reward share) strictly exceeds the prize.
// Secure iff (sum alpha + R) / n > pi.
inline SecurityVerdict strong_security(const AttackPlan& alpha, const EconomicParams& params,
                                       std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("strong security needs n >= 1 validators");
    }
    if (!params.reward) {
        throw std::invalid_argument("strong security needs a resolved total reward R");
    }
    double committed = 0.0;
    for (std::size_t j = 0; j < alpha.ssps(); ++j) {
        committed += alpha.column_sum(j);
    }
    SecurityVerdict v;
    v.binding = BindingConstraint::strong_average;
    const double average = (committed + *params.reward) / static_cast<double>(n);
    v.margin = average - params.pi;
    v.secure = average > params.pi;
    return v;
}

// Largest validator count compatible with the security guarantee:
// n < (theta + r) * Delta / pi, strict. pi = 0 leaves the count unbounded.
struct ValidatorBound {
    bool unbounded = false;
    std::size_t max_n = 0;  // 0 when no count >= 1 satisfies the bound
    double raw_bound = 0.0;
};

inline ValidatorBound validator_bound(double delta, const EconomicParams& params) {
    ValidatorBound b;
    if (params.pi == 0.0) {
        b.unbounded = true;
        b.raw_bound = std::numeric_limits<double>::infinity();
        return b;
    }
    b.raw_bound = (params.theta + params.r) * delta / params.pi;
    if (b.raw_bound <= 1.0) {
        b.max_n = 0;
        return b;
    }
    double n = std::floor(b.raw_bound);
    if (n == b.raw_bound) {
        n -= 1.0;  // the bound is strict
    }
    b.max_n = static_cast<std::size_t>(n);
    return b;
}

// Minimum cost to mount a successful attack, per architecture:
//   shared      theta * Delta
//   isolated    theta * min_j Delta_j (weakest pool)
//   single(j0)  theta * Delta_j0
struct AttackCostBreakdown {
    ModelKind model = ModelKind::shared();
    double min_cost = 0.0;
    std::optional<std::size_t> weakest_ssp;
    std::vector<double> per_ssp_costs;  // theta * Delta_j for every pool
    bool degenerate = false;            // the stake basis of min_cost is zero
};

inline AttackCostBreakdown min_attack_cost(const AllocationMatrix& omega,
                                           const EconomicParams& params, ModelKind model) {
    AttackCostBreakdown out;
    out.model = model;
    const auto deltas = omega.column_sums();
    out.per_ssp_costs.resize(deltas.size());
    for (std::size_t j = 0; j < deltas.size(); ++j) {
        out.per_ssp_costs[j] = params.theta * deltas[j];
    }
    switch (model.variant()) {
        case ModelKind::Variant::shared: {
            out.min_cost = params.theta * total_stake(omega);
            out.degenerate = !(out.min_cost > 0.0);
            break;
        }
        case ModelKind::Variant::isolated: {
            std::size_t weakest = 0;
            for (std::size_t j = 1; j < deltas.size(); ++j) {
                if (deltas[j] < deltas[weakest]) {
                    weakest = j;
                }
            }
            out.weakest_ssp = weakest;
            out.min_cost = out.per_ssp_costs[weakest];
            out.degenerate = !(deltas[weakest] > 0.0);
            break;
        }
        case ModelKind::Variant::single: {
            omega.check_column(model.pool());
            out.weakest_ssp = model.pool();
            out.min_cost = out.per_ssp_costs[model.pool()];
            out.degenerate = !(deltas[model.pool()] > 0.0);
            break;
        }
    }
    return out;
}

// Default designated pool for the single-SSP baseline: the largest pool.
inline std::size_t default_single_pool(const AllocationMatrix& omega) {
    const auto deltas = omega.column_sums();
    std::size_t best = 0;
    for (std::size_t j = 1; j < deltas.size(); ++j) {
        if (deltas[j] > deltas[best]) {
            best = j;
        }
    }
    return best;
}

// Strict upper bound on the attack profit tolerable under the isolated
// model: pi < theta * min_j Delta_j.
inline double tightened_threshold(const AllocationMatrix& omega, const EconomicParams& params) {
    const auto deltas = omega.column_sums();
    return params.theta * *std::min_element(deltas.begin(), deltas.end());
}

// Security level of a per-SSP stake vector: S(x) = theta * min_j x_j.
// Concave in x; the maximin objective of the allocation module.
inline double security_level(const std::vector<double>& stakes, double theta) {
    if (stakes.empty()) {
        throw std::invalid_argument("security level needs at least one SSP stake");
    }
    for (double x : stakes) {
        if (x < 0.0) {
            throw std::invalid_argument("security level needs nonnegative stakes");
        }
    }
    return theta * *std::min_element(stakes.begin(), stakes.end());
}

}  // namespace sspsec
