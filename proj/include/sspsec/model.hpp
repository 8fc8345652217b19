#pragma once

// Core primitives of the restaking economy: validator stakes, per-SSP
// allocations, attack plans, and the honest/adversarial utility functions
// they induce. Everything here is an immutable value; all operations are
// pure functions, safe for unrestricted concurrent use.
//
// Units: stakes are USD-denominated by default. Token-denominated
// allocations are converted up front with a PriceVector (see usd_allocation).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sspsec {

// Relative tolerance for membership in the feasible allocation set.
inline constexpr double kFeasibilityTol = 1e-9;

class internal_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

namespace detail {

inline double relative_gap(double value, double reference) {
    const double scale = std::max(1.0, std::abs(reference));
    return std::abs(value - reference) / scale;
}

// Row-major n x k grid of stake amounts. Base for the allocation and
// attack-plan types; construction checks shape only, domain validation is
// explicit (validate_allocation / validate_attack_plan).
class StakeGrid {
public:
    StakeGrid() = default;

    StakeGrid(std::size_t n_validators, std::size_t n_ssps, double fill = 0.0)
        : n_(n_validators), k_(n_ssps), cells_(n_ * k_, fill) {
        if (n_ == 0 || k_ == 0) {
            throw std::invalid_argument("stake grid needs at least one validator and one SSP");
        }
    }

    StakeGrid(std::vector<std::vector<double>> rows) {
        if (rows.empty() || rows.front().empty()) {
            throw std::invalid_argument("stake grid needs at least one validator and one SSP");
        }
        n_ = rows.size();
        k_ = rows.front().size();
        cells_.reserve(n_ * k_);
        for (const auto& row : rows) {
            if (row.size() != k_) {
                throw std::invalid_argument("stake grid rows have unequal lengths");
            }
            cells_.insert(cells_.end(), row.begin(), row.end());
        }
    }

    std::size_t validators() const noexcept { return n_; }
    std::size_t ssps() const noexcept { return k_; }

    double operator()(std::size_t i, std::size_t j) const { return cells_[i * k_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return cells_[i * k_ + j]; }

    double row_sum(std::size_t i) const {
        check_row(i);
        double total = 0.0;
        for (std::size_t j = 0; j < k_; ++j) {
            total += cells_[i * k_ + j];
        }
        return total;
    }

    double column_sum(std::size_t j) const {
        check_column(j);
        double total = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            total += cells_[i * k_ + j];
        }
        return total;
    }

    std::vector<double> column_sums() const {
        std::vector<double> sums(k_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < k_; ++j) {
                sums[j] += cells_[i * k_ + j];
            }
        }
        return sums;
    }

    const std::vector<double>& cells() const noexcept { return cells_; }

    void check_row(std::size_t i) const {
        if (i >= n_) {
            throw std::out_of_range("validator index " + std::to_string(i) + " out of range (n=" +
                                    std::to_string(n_) + ")");
        }
    }

    void check_column(std::size_t j) const {
        if (j >= k_) {
            throw std::out_of_range("SSP index " + std::to_string(j) + " out of range (k=" +
                                    std::to_string(k_) + ")");
        }
    }

private:
    std::size_t n_ = 0;
    std::size_t k_ = 0;
    std::vector<double> cells_;
};

}  // namespace detail

// Per-validator total stake sigma(v_i).
class StakeTable {
public:
    explicit StakeTable(std::vector<double> stakes) : stakes_(std::move(stakes)) {
        if (stakes_.empty()) {
            throw std::invalid_argument("stake table needs at least one validator");
        }
        for (std::size_t i = 0; i < stakes_.size(); ++i) {
            if (!(stakes_[i] > 0.0)) {
                throw std::invalid_argument("stake of validator " + std::to_string(i) +
                                            " must be > 0");
            }
        }
    }

    std::size_t size() const noexcept { return stakes_.size(); }
    double operator[](std::size_t i) const { return stakes_[i]; }

    double at(std::size_t i) const {
        if (i >= stakes_.size()) {
            throw std::out_of_range("validator index " + std::to_string(i) + " out of range (n=" +
                                    std::to_string(stakes_.size()) + ")");
        }
        return stakes_[i];
    }

    double total() const {
        double sum = 0.0;
        for (double s : stakes_) {
            sum += s;
        }
        return sum;
    }

    const std::vector<double>& values() const noexcept { return stakes_; }

private:
    std::vector<double> stakes_;
};

// The omega table: stake each validator allocates to each SSP.
struct AllocationMatrix : detail::StakeGrid {
    using detail::StakeGrid::StakeGrid;
};

// The alpha table: stake each validator commits to an attack, per SSP.
// Valid plans satisfy 0 <= alpha(i,j) <= omega(i,j) elementwise.
struct AttackPlan : detail::StakeGrid {
    using detail::StakeGrid::StakeGrid;
};

// Per-SSP USD price of the restaked asset.
class PriceVector {
public:
    explicit PriceVector(std::vector<double> prices) : prices_(std::move(prices)) {
        if (prices_.empty()) {
            throw std::invalid_argument("price vector needs at least one SSP");
        }
        for (std::size_t j = 0; j < prices_.size(); ++j) {
            if (!(prices_[j] > 0.0)) {
                throw std::invalid_argument("price of SSP " + std::to_string(j) + " must be > 0");
            }
        }
    }

    std::size_t size() const noexcept { return prices_.size(); }
    double operator[](std::size_t j) const { return prices_[j]; }
    const std::vector<double>& values() const noexcept { return prices_; }

private:
    std::vector<double> prices_;
};

// Economic parameters of one analysis: attack profit pi, capture threshold
// theta, reward rate r, and (optionally) a resolved total reward R.
struct EconomicParams {
    double pi = 0.0;
    double theta = 1.0 / 3.0;
    double r = 0.0;
    std::optional<double> reward;  // total reward R; defaults to r * Delta

    EconomicParams(double pi_, double theta_, double r_,
                   std::optional<double> reward_ = std::nullopt)
        : pi(pi_), theta(theta_), r(r_), reward(reward_) {
        if (!(pi >= 0.0)) {
            throw std::invalid_argument("attack profit pi must be >= 0");
        }
        if (!(theta > 0.0 && theta < 1.0)) {
            throw std::invalid_argument("attack threshold theta must lie in (0, 1)");
        }
        if (!(r >= 0.0)) {
            throw std::invalid_argument("reward rate r must be >= 0");
        }
        if (reward && !(*reward >= 0.0)) {
            throw std::invalid_argument("total reward R must be >= 0");
        }
    }

    // Total reward for a system of total stake delta.
    double total_reward(double delta) const { return reward ? *reward : r * delta; }

    // When both r and R are supplied they must agree for the given total
    // stake: |R - r * Delta| <= 1e-9 * max(1, R).
    void check_reward_consistency(double delta) const {
        if (!reward) {
            return;
        }
        const double implied = r * delta;
        if (std::abs(*reward - implied) > kFeasibilityTol * std::max(1.0, *reward)) {
            throw std::invalid_argument("total reward R=" + std::to_string(*reward) +
                                        " inconsistent with r*Delta=" + std::to_string(implied));
        }
    }
};

// Which architecture a cost or verdict refers to.
//   isolated  - one independent consensus pool per SSP (fragmented stake)
//   shared    - a single unified validator set securing every SSP
//   single    - one designated SSP pool used as a baseline
class ModelKind {
public:
    enum class Variant { isolated, shared, single };

    static ModelKind isolated() { return ModelKind(Variant::isolated, 0); }
    static ModelKind shared() { return ModelKind(Variant::shared, 0); }
    static ModelKind single(std::size_t pool) { return ModelKind(Variant::single, pool); }

    Variant variant() const noexcept { return variant_; }
    std::size_t pool() const {
        if (variant_ != Variant::single) {
            throw std::logic_error("pool() is only defined for the single-SSP baseline");
        }
        return pool_;
    }

    std::string name() const {
        switch (variant_) {
            case Variant::isolated: return "isolated";
            case Variant::shared: return "shared";
            case Variant::single: return "single";
        }
        return "?";
    }

    friend bool operator==(const ModelKind& a, const ModelKind& b) {
        return a.variant_ == b.variant_ && a.pool_ == b.pool_;
    }

private:
    ModelKind(Variant v, std::size_t pool) : variant_(v), pool_(pool) {}
    Variant variant_;
    std::size_t pool_;
};

// One feasibility defect found in an allocation matrix.
struct FeasibilityViolation {
    enum class Kind { row_deficit, row_excess, negative_entry };
    Kind kind;
    std::size_t row;
    std::size_t column;  // meaningful for negative_entry only
    double amount;       // deficit/excess magnitude, or the offending value

    std::string describe() const {
        switch (kind) {
            case Kind::row_deficit:
                return "row " + std::to_string(row) + " deficit " + std::to_string(amount);
            case Kind::row_excess:
                return "row " + std::to_string(row) + " excess " + std::to_string(amount);
            case Kind::negative_entry:
                return "negative entry at (" + std::to_string(row) + ", " +
                       std::to_string(column) + "): " + std::to_string(amount);
        }
        return "?";
    }
};

struct FeasibilityReport {
    std::vector<FeasibilityViolation> violations;
    bool feasible() const noexcept { return violations.empty(); }
};

// Membership test for the feasible set Omega: entries nonnegative, row i
// summing to sigma(v_i) within the relative tolerance.
inline FeasibilityReport validate_allocation(const AllocationMatrix& omega,
                                             const StakeTable& sigma) {
    if (omega.validators() != sigma.size()) {
        throw std::invalid_argument("allocation has " + std::to_string(omega.validators()) +
                                    " validators, stake table has " +
                                    std::to_string(sigma.size()));
    }
    FeasibilityReport report;
    for (std::size_t i = 0; i < omega.validators(); ++i) {
        for (std::size_t j = 0; j < omega.ssps(); ++j) {
            if (omega(i, j) < 0.0) {
                report.violations.push_back({FeasibilityViolation::Kind::negative_entry, i, j,
                                             omega(i, j)});
            }
        }
        const double sum = omega.row_sum(i);
        if (detail::relative_gap(sum, sigma[i]) > kFeasibilityTol) {
            const bool deficit = sum < sigma[i];
            report.violations.push_back({deficit ? FeasibilityViolation::Kind::row_deficit
                                                 : FeasibilityViolation::Kind::row_excess,
                                         i, 0, std::abs(sigma[i] - sum)});
        }
    }
    return report;
}

inline void require_feasible(const AllocationMatrix& omega, const StakeTable& sigma) {
    const auto report = validate_allocation(omega, sigma);
    if (!report.feasible()) {
        std::string msg = "allocation infeasible:";
        for (const auto& v : report.violations) {
            msg += " [" + v.describe() + "]";
        }
        throw std::invalid_argument(msg);
    }
}

// Elementwise validity of an attack plan against its companion allocation.
inline void validate_attack_plan(const AttackPlan& alpha, const AllocationMatrix& omega) {
    if (alpha.validators() != omega.validators() || alpha.ssps() != omega.ssps()) {
        throw std::invalid_argument("attack plan shape " + std::to_string(alpha.validators()) +
                                    "x" + std::to_string(alpha.ssps()) +
                                    " does not match allocation " +
                                    std::to_string(omega.validators()) + "x" +
                                    std::to_string(omega.ssps()));
    }
    for (std::size_t i = 0; i < alpha.validators(); ++i) {
        for (std::size_t j = 0; j < alpha.ssps(); ++j) {
            if (alpha(i, j) < 0.0 || alpha(i, j) > omega(i, j)) {
                throw std::invalid_argument("attack stake at (" + std::to_string(i) + ", " +
                                            std::to_string(j) + ") outside [0, omega]");
            }
        }
    }
}

// Total economic security Delta: the sum of all allocated stake. Columns are
// accumulated first so that Delta >= every column sum even in floating point.
inline double total_stake(const AllocationMatrix& omega) {
    double total = 0.0;
    for (std::size_t j = 0; j < omega.ssps(); ++j) {
        total += omega.column_sum(j);
    }
    return total;
}

// Stake securing the j-th SSP pool (Delta_j).
inline double ssp_stake(const AllocationMatrix& omega, std::size_t j) {
    return omega.column_sum(j);
}

// Reward from honest participation: u(v_i) = r * sigma(v_i). Independent of
// the allocation under proportional rewards.
inline double honest_utility(std::size_t i, const StakeTable& sigma,
                             const EconomicParams& params) {
    return params.r * sigma.at(i);
}

// Cost borne by validator i under attack plan alpha:
// c(v, alpha) = min(sigma(v), sum_s alpha(v, s)).
inline double attack_cost(std::size_t i, const AttackPlan& alpha, const StakeTable& sigma) {
    return std::min(sigma.at(i), alpha.row_sum(i));
}

inline double total_attack_cost(const AttackPlan& alpha, const StakeTable& sigma) {
    if (alpha.validators() != sigma.size()) {
        throw std::invalid_argument("attack plan has " + std::to_string(alpha.validators()) +
                                    " validators, stake table has " +
                                    std::to_string(sigma.size()));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.validators(); ++i) {
        total += attack_cost(i, alpha, sigma);
    }
    return total;
}

// Share of the attack prize awarded to validator i, proportional to costs
// borne: gamma(v, alpha) = c(v, alpha) / C(alpha). Undefined at C(alpha) = 0.
inline double attack_share(std::size_t i, const AttackPlan& alpha, const StakeTable& sigma) {
    const double total = total_attack_cost(alpha, sigma);
    if (!(total > 0.0)) {
        throw std::domain_error("attack share undefined: total attack cost is zero");
    }
    return attack_cost(i, alpha, sigma) / total;
}

// Utility of validator i when the attack succeeds:
// u_v(alpha) = gamma(v, alpha) * pi - c(v, alpha).
inline double attack_utility(std::size_t i, const AttackPlan& alpha, const StakeTable& sigma,
                             const EconomicParams& params) {
    return attack_share(i, alpha, sigma) * params.pi - attack_cost(i, alpha, sigma);
}

// Profitability assessment for an attack plan.
//   captured[j]  - whether the committed stake reaches theta of pool j;
//                  nullopt when the pool holds no stake (ratio undefined).
//   globally_profitable - theta * Delta < total alpha < pi, both strict.
struct ProfitabilityVerdict {
    std::vector<std::optional<bool>> captured;
    bool globally_profitable = false;
    double committed = 0.0;  // total attacking stake

    bool any_capture_undefined() const {
        for (const auto& c : captured) {
            if (!c) {
                return true;
            }
        }
        return false;
    }
};

inline ProfitabilityVerdict attack_profitable(const AttackPlan& alpha,
                                              const AllocationMatrix& omega,
                                              const EconomicParams& params) {
    validate_attack_plan(alpha, omega);
    ProfitabilityVerdict verdict;
    verdict.captured.resize(omega.ssps());
    double committed = 0.0;
    for (std::size_t j = 0; j < omega.ssps(); ++j) {
        const double pool = omega.column_sum(j);
        const double attacking = alpha.column_sum(j);
        committed += attacking;
        if (pool > 0.0) {
            verdict.captured[j] = attacking / pool >= params.theta;
        }
    }
    verdict.committed = committed;
    const double delta = total_stake(omega);
    verdict.globally_profitable = params.theta * delta < committed && committed < params.pi;
    return verdict;
}

// Even split of each validator's stake across k SSPs.
inline AllocationMatrix uniform_allocation(const StakeTable& sigma, std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("uniform allocation needs k >= 1 SSPs");
    }
    AllocationMatrix omega(sigma.size(), k);
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        const double share = sigma[i] / static_cast<double>(k);
        for (std::size_t j = 0; j < k; ++j) {
            omega(i, j) = share;
        }
    }
    return omega;
}

// Column-wise conversion of a token-denominated allocation to USD.
inline AllocationMatrix usd_allocation(const AllocationMatrix& omega, const PriceVector& prices) {
    if (prices.size() != omega.ssps()) {
        throw std::invalid_argument("price vector has " + std::to_string(prices.size()) +
                                    " entries, allocation has " + std::to_string(omega.ssps()) +
                                    " SSPs");
    }
    AllocationMatrix usd(omega.validators(), omega.ssps());
    for (std::size_t i = 0; i < omega.validators(); ++i) {
        for (std::size_t j = 0; j < omega.ssps(); ++j) {
            usd(i, j) = omega(i, j) * prices[j];
        }
    }
    return usd;
}

// Stake table implied by an allocation's row sums (used after a USD
// conversion, where per-validator totals change with prices).
inline StakeTable implied_stakes(const AllocationMatrix& omega) {
    std::vector<double> stakes(omega.validators());
    for (std::size_t i = 0; i < omega.validators(); ++i) {
        stakes[i] = omega.row_sum(i);
    }
    return StakeTable(std::move(stakes));
}

}  // namespace sspsec
