#pragma once

// Bribery-attack economics: per-unit bribe requirements lambda, cheapest
// compromising coalition per SSP, and the multi-vs-single SSP cost
// comparison. The coalition search enumerates candidate lambda* values in
// ascending order; for each candidate the minimum-stake subset meeting the
// capture target is found exactly by meet-in-the-middle while the eligible
// set fits cfg.exact_limit, and by a dynamic program on a 1e-6 * Delta_j
// stake grid beyond that (error bounded by the grid pitch). Costs are
// always recomputed canonically from the chosen coalition, so the exact
// path agrees bitwise with exhaustive enumeration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sspsec/model.hpp"

namespace sspsec {

struct BriberyConfig {
    double theta = 1.0 / 3.0;
    // slashing charged to a bribed validator given (index, committed stake);
    // the default forfeits the committed stake in full
    std::function<double(std::size_t, double)> slashing =
        [](std::size_t, double committed) { return committed; };
    // largest eligible-set size handled by the exact meet-in-the-middle scan
    std::size_t exact_limit = 28;
};

// Cheapest bribe package compromising one SSP: pay every coalition member
// the per-unit premium lambda_star on its allocated stake.
struct BriberyPlan {
    std::size_t ssp = 0;
    std::vector<std::size_t> coalition;  // ascending validator indices
    double lambda_star = 0.0;
    double coalition_stake = 0.0;
    double cost = 0.0;
};

// lambda_j(v_i) = u(v_i) / omega(v_i, s_j): the premium per unit of stake
// that makes bribing v_i in pool j worthwhile. Infinite when the validator
// holds nothing in that pool (unusable for an attack on s_j).
inline double per_unit_bribe(std::size_t i, std::size_t j, const AllocationMatrix& omega,
                             const StakeTable& sigma, const EconomicParams& params) {
    if (i >= omega.validators() || j >= omega.ssps()) {
        throw std::out_of_range("per_unit_bribe: index out of range");
    }
    const double entry = omega(i, j);
    if (entry == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return honest_utility(i, sigma, params) / entry;
}

// Acceptance condition for a single bribe offer: the bribe must strictly
// beat committed stake plus slashing plus forgone honest utility.
inline bool bribe_acceptance(double bribe, double committed, double slashed, double utility) {
    if (bribe < 0.0 || committed < 0.0 || slashed < 0.0 || utility < 0.0) {
        throw std::invalid_argument("bribe_acceptance: arguments must be nonnegative");
    }
    return bribe > committed + slashed + utility;
}

namespace detail {

struct BribeEntry {
    std::size_t validator = 0;
    double stake = 0.0;
    double lambda = 0.0;
};

struct CoalitionEval {
    std::vector<std::size_t> members;  // ascending validator indices
    double stake = 0.0;
    double lambda_star = 0.0;
    double cost = std::numeric_limits<double>::infinity();

    bool found() const { return !members.empty(); }
};

// Canonical evaluation shared by every search path and by the brute-force
// oracle: stake summed in ascending validator order, premium taken from the
// coalition's largest lambda.
inline CoalitionEval evaluate_coalition(std::vector<std::size_t> members,
                                        const std::vector<double>& stake_of,
                                        const std::vector<double>& lambda_of) {
    std::sort(members.begin(), members.end());
    CoalitionEval eval;
    eval.members = std::move(members);
    for (std::size_t v : eval.members) {
        eval.stake += stake_of[v];
        eval.lambda_star = std::max(eval.lambda_star, lambda_of[v]);
    }
    eval.cost = (1.0 + eval.lambda_star) * eval.stake;
    return eval;
}

// Ordering on plans: cost, then coalition size, then lexicographic indices.
inline bool better_plan(const CoalitionEval& a, const CoalitionEval& b) {
    if (!a.found() || !b.found()) {
        return a.found();
    }
    if (a.cost != b.cost) {
        return a.cost < b.cost;
    }
    if (a.members.size() != b.members.size()) {
        return a.members.size() < b.members.size();
    }
    return a.members < b.members;
}

struct HalfSubset {
    double sum = 0.0;
    std::uint32_t mask = 0;
    std::uint32_t count = 0;
};

inline void enumerate_half(const std::vector<BribeEntry>& entries, std::size_t begin,
                           std::size_t len, std::vector<HalfSubset>& out) {
    out.clear();
    out.reserve(std::size_t{1} << len);
    out.push_back(HalfSubset{});
    for (std::size_t b = 0; b < len; ++b) {
        const double w = entries[begin + b].stake;
        const std::size_t sz = out.size();
        for (std::size_t s = 0; s < sz; ++s) {
            out.push_back(HalfSubset{out[s].sum + w, out[s].mask | (1u << b),
                                     out[s].count + 1});
        }
    }
}

inline void append_members(std::uint32_t mask, std::size_t base,
                           const std::vector<BribeEntry>& entries,
                           std::vector<std::size_t>& members) {
    for (std::size_t b = 0; mask != 0; ++b, mask >>= 1) {
        if (mask & 1u) {
            members.push_back(entries[base + b].validator);
        }
    }
}

// Minimum-stake subset of entries[0..len) with sum >= target, exact via
// meet-in-the-middle. Ties resolve toward fewer members, then toward the
// lexicographically smaller validator set.
inline CoalitionEval mitm_min_subset(const std::vector<BribeEntry>& entries, std::size_t len,
                                     double target, const std::vector<double>& stake_of,
                                     const std::vector<double>& lambda_of) {
    const std::size_t len_a = len / 2;
    const std::size_t len_b = len - len_a;
    std::vector<HalfSubset> half_a;
    std::vector<HalfSubset> half_b;
    enumerate_half(entries, 0, len_a, half_a);
    enumerate_half(entries, len_a, len_b, half_b);
    std::sort(half_b.begin(), half_b.end(), [](const HalfSubset& x, const HalfSubset& y) {
        if (x.sum != y.sum) {
            return x.sum < y.sum;
        }
        if (x.count != y.count) {
            return x.count < y.count;
        }
        return x.mask < y.mask;
    });

    bool have = false;
    double best_sum = 0.0;
    std::uint32_t best_count = 0;
    std::uint32_t best_mask_a = 0;
    std::uint32_t best_mask_b = 0;
    auto materialize = [&](std::uint32_t mask_a, std::uint32_t mask_b) {
        std::vector<std::size_t> members;
        append_members(mask_a, 0, entries, members);
        append_members(mask_b, len_a, entries, members);
        std::sort(members.begin(), members.end());
        return members;
    };

    for (const HalfSubset& a : half_a) {
        auto it = std::lower_bound(
            half_b.begin(), half_b.end(), target - a.sum,
            [](const HalfSubset& h, double v) { return h.sum < v; });
        while (it != half_b.end() && a.sum + it->sum < target) {
            ++it;
        }
        if (it == half_b.end()) {
            continue;
        }
        const double total = a.sum + it->sum;
        const std::uint32_t count = a.count + it->count;
        if (!have || total < best_sum ||
            (total == best_sum &&
             (count < best_count ||
              (count == best_count &&
               materialize(a.mask, it->mask) < materialize(best_mask_a, best_mask_b))))) {
            have = true;
            best_sum = total;
            best_count = count;
            best_mask_a = a.mask;
            best_mask_b = it->mask;
        }
    }
    if (!have) {
        return CoalitionEval{};
    }
    return evaluate_coalition(materialize(best_mask_a, best_mask_b), stake_of, lambda_of);
}

// Grid dynamic program for eligible sets beyond the exact limit: stakes are
// floored onto a 1e-6 * Delta_j grid and the target ceiled, so any grid
// solution is feasible in real units; optimality is approximate within the
// grid pitch times the coalition size.
inline CoalitionEval grid_min_subset(const std::vector<BribeEntry>& entries, std::size_t len,
                                     double target, double delta_j,
                                     const std::vector<double>& stake_of,
                                     const std::vector<double>& lambda_of) {
    const double grid = 1e-6 * delta_j;
    const std::size_t cap = static_cast<std::size_t>(std::ceil(target / grid));
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dp(cap + 1, inf);
    dp[0] = 0.0;
    std::vector<std::vector<bool>> took(len, std::vector<bool>(cap + 1, false));
    std::vector<std::size_t> cap_from(len, 0);

    for (std::size_t i = 0; i < len; ++i) {
        const auto w = static_cast<std::size_t>(std::floor(entries[i].stake / grid));
        if (w == 0) {
            continue;
        }
        const double x = entries[i].stake;
        for (std::size_t s = cap + 1; s-- > 0;) {
            if (dp[s] == inf) {
                continue;
            }
            const std::size_t t = std::min(s + w, cap);
            if (dp[s] + x < dp[t]) {
                dp[t] = dp[s] + x;
                took[i][t] = true;
                if (t == cap) {
                    cap_from[i] = s;
                }
            }
        }
    }
    if (dp[cap] == inf) {
        return CoalitionEval{};
    }
    std::vector<std::size_t> members;
    std::size_t s = cap;
    for (std::size_t i = len; i-- > 0;) {
        if (s == 0) {
            break;
        }
        if (took[i][s]) {
            members.push_back(entries[i].validator);
            const auto w = static_cast<std::size_t>(std::floor(entries[i].stake / grid));
            s = (s == cap) ? cap_from[i] : s - w;
        }
    }
    return evaluate_coalition(std::move(members), stake_of, lambda_of);
}

}  // namespace detail

// Exact minimizer of C_j = min over coalitions of (1 + lambda*) * sum omega
// subject to the coalition's stake in s_j reaching theta * Delta_j.
inline BriberyPlan min_bribery_cost_ssp(std::size_t j, const AllocationMatrix& omega,
                                        const StakeTable& sigma, const EconomicParams& params,
                                        const BriberyConfig& cfg = BriberyConfig{}) {
    omega.check_column(j);
    if (omega.validators() != sigma.size()) {
        throw std::invalid_argument("min_bribery_cost_ssp: stake table size mismatch");
    }
    const double delta_j = omega.column_sum(j);
    if (delta_j <= 0.0) {
        throw std::invalid_argument("min_bribery_cost_ssp: SSP pool holds no stake");
    }
    const double target = cfg.theta * delta_j;

    std::vector<double> stake_of(omega.validators(), 0.0);
    std::vector<double> lambda_of(omega.validators(), 0.0);
    std::vector<detail::BribeEntry> entries;
    for (std::size_t i = 0; i < omega.validators(); ++i) {
        const double w = omega(i, j);
        if (w > 0.0) {
            const double lambda = honest_utility(i, sigma, params) / w;
            stake_of[i] = w;
            lambda_of[i] = lambda;
            entries.push_back(detail::BribeEntry{i, w, lambda});
        }
    }
    std::sort(entries.begin(), entries.end(),
              [](const detail::BribeEntry& a, const detail::BribeEntry& b) {
                  if (a.lambda != b.lambda) {
                      return a.lambda < b.lambda;
                  }
                  return a.validator < b.validator;
              });

    double prefix = 0.0;
    std::vector<double> prefix_sums(entries.size());
    for (std::size_t c = 0; c < entries.size(); ++c) {
        prefix += entries[c].stake;
        prefix_sums[c] = prefix;
    }

    detail::CoalitionEval best;
    for (std::size_t c = 0; c < entries.size(); ++c) {
        // one candidate per distinct lambda: the last index of each run
        if (c + 1 < entries.size() && entries[c + 1].lambda == entries[c].lambda) {
            continue;
        }
        if (prefix_sums[c] < target) {
            continue;
        }
        // any coalition in this prefix costs at least (1 + lambda_c) * target
        if (best.found() && (1.0 + entries[c].lambda) * target > best.cost) {
            break;
        }
        const std::size_t len = c + 1;
        detail::CoalitionEval eval =
            (len <= cfg.exact_limit)
                ? detail::mitm_min_subset(entries, len, target, stake_of, lambda_of)
                : detail::grid_min_subset(entries, len, target, delta_j, stake_of, lambda_of);
        if (detail::better_plan(eval, best)) {
            best = eval;
        }
    }
    if (!best.found()) {
        throw internal_error("min_bribery_cost_ssp: no feasible coalition");
    }

    BriberyPlan plan;
    plan.ssp = j;
    plan.coalition = std::move(best.members);
    plan.lambda_star = best.lambda_star;
    plan.coalition_stake = best.stake;
    plan.cost = best.cost;
    return plan;
}

// Exhaustive reference: enumerates every nonempty coalition. Quadratic in
// 2^n, so guarded to small instances; used to validate the optimized path.
inline BriberyPlan brute_force_bribery_oracle(std::size_t j, const AllocationMatrix& omega,
                                              const StakeTable& sigma,
                                              const EconomicParams& params,
                                              const BriberyConfig& cfg = BriberyConfig{}) {
    omega.check_column(j);
    const double delta_j = omega.column_sum(j);
    if (delta_j <= 0.0) {
        throw std::invalid_argument("brute_force_bribery_oracle: SSP pool holds no stake");
    }
    const double target = cfg.theta * delta_j;

    std::vector<double> stake_of(omega.validators(), 0.0);
    std::vector<double> lambda_of(omega.validators(), 0.0);
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < omega.validators(); ++i) {
        if (omega(i, j) > 0.0) {
            stake_of[i] = omega(i, j);
            lambda_of[i] = honest_utility(i, sigma, params) / omega(i, j);
            usable.push_back(i);
        }
    }
    if (usable.size() > 20) {
        throw std::invalid_argument("brute_force_bribery_oracle: instance too large");
    }

    detail::CoalitionEval best;
    const std::uint32_t limit = 1u << usable.size();
    for (std::uint32_t mask = 1; mask < limit; ++mask) {
        double sum = 0.0;
        for (std::size_t b = 0; b < usable.size(); ++b) {
            if (mask & (1u << b)) {
                sum += stake_of[usable[b]];
            }
        }
        if (sum < target) {
            continue;
        }
        std::vector<std::size_t> members;
        for (std::size_t b = 0; b < usable.size(); ++b) {
            if (mask & (1u << b)) {
                members.push_back(usable[b]);
            }
        }
        detail::CoalitionEval eval =
            detail::evaluate_coalition(std::move(members), stake_of, lambda_of);
        if (detail::better_plan(eval, best)) {
            best = eval;
        }
    }
    if (!best.found()) {
        throw internal_error("brute_force_bribery_oracle: no feasible coalition");
    }

    BriberyPlan plan;
    plan.ssp = j;
    plan.coalition = std::move(best.members);
    plan.lambda_star = best.lambda_star;
    plan.coalition_stake = best.stake;
    plan.cost = best.cost;
    return plan;
}

struct MultiBriberyResult {
    double cost = 0.0;
    std::size_t weakest = 0;  // index of the cheapest-to-bribe SSP
    std::vector<BriberyPlan> plans;
};

// C_multi = min_j C_j: the attacker picks the cheapest pool to compromise.
inline MultiBriberyResult bribery_cost_multi(const AllocationMatrix& omega,
                                             const StakeTable& sigma,
                                             const EconomicParams& params,
                                             const BriberyConfig& cfg = BriberyConfig{}) {
    MultiBriberyResult result;
    result.plans.reserve(omega.ssps());
    for (std::size_t j = 0; j < omega.ssps(); ++j) {
        result.plans.push_back(min_bribery_cost_ssp(j, omega, sigma, params, cfg));
        if (j == 0 || result.plans[j].cost < result.cost) {
            result.cost = result.plans[j].cost;
            result.weakest = j;
        }
    }
    return result;
}

// All validators share one pool holding the whole stake, so the attacker
// needs theta * Delta of it at the premium of the most demanding validator:
// C_single = (1 + max_v lambda(v)) * theta * Delta.
inline double bribery_cost_single(const StakeTable& sigma, const EconomicParams& params,
                                  const std::vector<double>& lambdas) {
    if (lambdas.size() != sigma.size()) {
        throw std::invalid_argument("bribery_cost_single: lambda vector size mismatch");
    }
    const double lambda_star = *std::max_element(lambdas.begin(), lambdas.end());
    return (1.0 + lambda_star) * params.theta * sigma.total();
}

// Under proportional rewards lambda(v) = u(v)/sigma(v) = r identically.
inline std::vector<double> proportional_lambdas(const StakeTable& sigma,
                                                const EconomicParams& params) {
    return std::vector<double>(sigma.size(), params.r);
}

}  // namespace sspsec
