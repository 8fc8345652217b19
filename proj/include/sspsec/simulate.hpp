#pragma once

// Seeded Monte Carlo engine comparing the isolated, shared, and designated
// single-pool architectures trial by trial: attack costs, security verdicts,
// bribery costs, validator margins, and reward-inequality metrics.
//
// Reproducibility contract: trial t draws from RandomStream(seed, t) in a
// fixed order (n stakes, then one Dirichlet row per validator, then pi,
// then the reward draw); price paths for shock studies use the offset
// substream RandomStream(seed, 2^32 + t). Results are written by trial
// index, so any worker count produces bitwise-identical output.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sspsec/allocation.hpp"
#include "sspsec/bribery.hpp"
#include "sspsec/model.hpp"
#include "sspsec/risk.hpp"
#include "sspsec/rng.hpp"
#include "sspsec/security.hpp"

namespace sspsec {

struct UniformRange {
    double lo = 0.0;
    double hi = 1.0;
};

enum class RewardMode { rate, amount };

struct SimulationConfig {
    std::size_t n_operators = 20;
    std::size_t n_ssps = 10;
    UniformRange stake_dist{10.0, 100.0};
    std::vector<double> alloc_concentration;  // empty = flat (all ones)
    RewardMode reward_mode = RewardMode::rate;
    UniformRange rate_dist{0.05, 0.5};
    UniformRange reward_dist{5.0, 20.0};
    UniformRange pi_dist{10000.0, 80000.0};
    double theta = 1.0 / 3.0;
    std::size_t n_trials = 1000;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::map<std::string, std::vector<double>> histogram_edges = default_histogram_edges();

    static std::map<std::string, std::vector<double>> default_histogram_edges() {
        std::vector<double> gini_edges;
        for (int b = 0; b <= 20; ++b) {
            gini_edges.push_back(b / 20.0);
        }
        std::vector<double> cost_edges;
        for (int b = 0; b <= 14; ++b) {
            cost_edges.push_back(50.0 * b);
        }
        const std::vector<double> margin_edges{-100000.0, -10000.0, -1000.0, -100.0, -10.0,
                                               -1.0,      0.0,      1.0,     10.0,   100.0};
        return {{"gini_proportional", gini_edges},
                {"attack_cost_shared", cost_edges},
                {"margin_isolated", margin_edges},
                {"margin_shared", margin_edges}};
    }

    void validate() const {
        auto check_range = [](const UniformRange& u, const std::string& name) {
            if (!(u.lo < u.hi)) {
                throw std::invalid_argument("range " + name + " needs lo < hi");
            }
        };
        if (n_operators == 0 || n_ssps == 0 || n_trials == 0) {
            throw std::invalid_argument("counts must be >= 1");
        }
        check_range(stake_dist, "stake_dist");
        check_range(rate_dist, "rate_dist");
        check_range(reward_dist, "reward_dist");
        check_range(pi_dist, "pi_dist");
        if (!(stake_dist.lo > 0.0)) {
            throw std::invalid_argument("stake_dist must stay positive");
        }
        if (!(theta > 0.0 && theta < 1.0)) {
            throw std::invalid_argument("theta must lie in (0, 1)");
        }
        if (!alloc_concentration.empty()) {
            if (alloc_concentration.size() != n_ssps) {
                throw std::invalid_argument("alloc_concentration needs one entry per SSP");
            }
            for (double c : alloc_concentration) {
                if (!(c > 0.0)) {
                    throw std::invalid_argument("alloc_concentration entries must be > 0");
                }
            }
        }
        const auto known = default_histogram_edges();
        for (const auto& [metric, edges] : histogram_edges) {
            if (known.find(metric) == known.end()) {
                throw std::invalid_argument("unknown histogram metric: " + metric);
            }
            if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()) ||
                std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
                throw std::invalid_argument("histogram edges for " + metric +
                                            " must be strictly increasing, length >= 2");
            }
        }
    }
};

struct Scenario {
    StakeTable sigma;
    AllocationMatrix omega;
    EconomicParams params;
};

// Deterministic draw for one trial; see the reproducibility contract above.
inline Scenario sample_scenario(const SimulationConfig& cfg, std::size_t trial) {
    cfg.validate();
    RandomStream rng(cfg.seed, static_cast<std::uint64_t>(trial));

    std::vector<double> stakes(cfg.n_operators);
    for (auto& s : stakes) {
        s = rng.uniform(cfg.stake_dist.lo, cfg.stake_dist.hi);
    }
    const std::vector<double> conc = cfg.alloc_concentration.empty()
                                         ? std::vector<double>(cfg.n_ssps, 1.0)
                                         : cfg.alloc_concentration;
    AllocationMatrix omega(cfg.n_operators, cfg.n_ssps);
    for (std::size_t i = 0; i < cfg.n_operators; ++i) {
        const auto w = rng.dirichlet(conc);
        double partial = 0.0;
        for (std::size_t j = 0; j + 1 < cfg.n_ssps; ++j) {
            omega(i, j) = stakes[i] * w[j];
            partial += omega(i, j);
        }
        // the last entry closes the row so it sums to sigma_i exactly
        omega(i, cfg.n_ssps - 1) = std::max(0.0, stakes[i] - partial);
    }
    const double pi = rng.uniform(cfg.pi_dist.lo, cfg.pi_dist.hi);
    if (cfg.reward_mode == RewardMode::rate) {
        const double r = rng.uniform(cfg.rate_dist.lo, cfg.rate_dist.hi);
        return Scenario{StakeTable(std::move(stakes)), std::move(omega),
                        EconomicParams(pi, cfg.theta, r)};
    }
    const double reward = rng.uniform(cfg.reward_dist.lo, cfg.reward_dist.hi);
    const double delta = total_stake(omega);
    return Scenario{StakeTable(std::move(stakes)), std::move(omega),
                    EconomicParams(pi, cfg.theta, reward / delta, reward)};
}

// Gini coefficient by the sorted mean-absolute-difference formula
// (n^2 denominator); 0 for perfect equality, (n-1)/n for one-holder.
inline double gini(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("gini: empty input");
    }
    double total = 0.0;
    for (double v : values) {
        if (v < 0.0) {
            throw std::invalid_argument("gini: negative value");
        }
        total += v;
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("gini: all values zero");
    }
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    // the rank coefficients sum to zero, so shifting by the minimum leaves
    // the value unchanged while making perfect equality an exact zero
    const double base = values.front();
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        acc += (2.0 * static_cast<double>(i + 1) - n - 1.0) * (values[i] - base);
    }
    return acc / (n * total);
}

namespace detail {

struct SoloOption {
    bool feasible = false;
    double cost = 0.0;  // cheapest capture basis reachable by the lone attacker
};

// The cheapest successful attack validator i can mount alone: capture the
// model's cheapest pool whose threshold stake fits inside i's allocation.
// Pools holding no stake are skipped (capture is undefined there).
inline SoloOption best_solo_option(std::size_t i, const AllocationMatrix& omega,
                                   const StakeTable& sigma, const std::vector<double>& deltas,
                                   double delta, double theta, const ModelKind& model) {
    SoloOption opt;
    switch (model.variant()) {
        case ModelKind::Variant::shared: {
            const double cost = theta * delta;
            if (delta > 0.0 && sigma.at(i) >= cost) {
                opt.feasible = true;
                opt.cost = cost;
            }
            break;
        }
        case ModelKind::Variant::isolated: {
            for (std::size_t j = 0; j < deltas.size(); ++j) {
                const double cost = theta * deltas[j];
                if (deltas[j] > 0.0 && omega(i, j) >= cost) {
                    if (!opt.feasible || cost < opt.cost) {
                        opt.feasible = true;
                        opt.cost = cost;
                    }
                }
            }
            break;
        }
        case ModelKind::Variant::single: {
            const std::size_t j = model.pool();
            const double cost = theta * deltas[j];
            if (deltas[j] > 0.0 && omega(i, j) >= cost) {
                opt.feasible = true;
                opt.cost = cost;
            }
            break;
        }
    }
    return opt;
}

inline double attack_value(const SoloOption& opt, double pi) {
    return opt.feasible ? std::max(0.0, pi - opt.cost) : 0.0;
}

}  // namespace detail

// Security margin M(v_i): honest utility minus the best utility available
// to i attacking alone (floored at zero, i.e. at forgoing the attack).
inline double margin(std::size_t i, const Scenario& sc, const ModelKind& model) {
    const auto deltas = sc.omega.column_sums();
    const double delta = total_stake(sc.omega);
    const auto opt = detail::best_solo_option(i, sc.omega, sc.sigma, deltas, delta,
                                              sc.params.theta, model);
    return honest_utility(i, sc.sigma, sc.params) - detail::attack_value(opt, sc.params.pi);
}

struct ModelOutcome {
    std::string model;
    double min_attack_cost = 0.0;
    bool weak_secure = false;
    bool strong_secure = false;
    double bribery_cost = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;
};

struct TrialRecord {
    std::size_t trial = 0;
    double pi = 0.0;
    double r = 0.0;
    double theta = 0.0;
    double total_stake = 0.0;
    double min_pool = 0.0;
    std::size_t single_pool = 0;
    std::array<ModelOutcome, 3> models;  // shared, isolated, single
    bool ordering_violation = false;
    double gini_proportional = 0.0;
    double gini_chain = 0.0;
    std::vector<double> stake;
    std::vector<double> honest;
    std::vector<double> best_attack_shared, margin_shared;
    std::vector<double> best_attack_isolated, margin_isolated;
    std::vector<double> best_attack_single, margin_single;
};

struct TrialResults {
    SimulationConfig config;
    std::vector<TrialRecord> trials;
};

inline TrialRecord run_single_trial(const SimulationConfig& cfg, std::size_t trial) {
    const Scenario sc = sample_scenario(cfg, trial);
    const auto deltas = sc.omega.column_sums();
    const double delta = total_stake(sc.omega);
    const std::size_t n = sc.sigma.size();
    const std::size_t j0 = default_single_pool(sc.omega);

    TrialRecord rec;
    rec.trial = trial;
    rec.pi = sc.params.pi;
    rec.r = sc.params.r;
    rec.theta = sc.params.theta;
    rec.total_stake = delta;
    rec.min_pool = *std::min_element(deltas.begin(), deltas.end());
    rec.single_pool = j0;

    const std::array<ModelKind, 3> kinds{ModelKind::shared(), ModelKind::isolated(),
                                         ModelKind::single(j0)};

    // strong security is evaluated at the maximal feasible plan alpha = omega
    // with the reward resolved to R = r * Delta; the average-incentive test
    // does not depend on how pools are partitioned, so it is shared by rows
    AttackPlan full(sc.omega.validators(), sc.omega.ssps());
    for (std::size_t i = 0; i < sc.omega.validators(); ++i) {
        for (std::size_t j = 0; j < sc.omega.ssps(); ++j) {
            full(i, j) = sc.omega(i, j);
        }
    }
    const EconomicParams resolved(sc.params.pi, sc.params.theta, sc.params.r,
                                  sc.params.total_reward(delta));
    const bool strong = strong_security(full, resolved, n).secure;

    const bool degenerate_pool = !(rec.min_pool > 0.0);
    MultiBriberyResult multi;
    if (!degenerate_pool) {
        BriberyConfig bc;
        bc.theta = cfg.theta;
        multi = bribery_cost_multi(sc.omega, sc.sigma, sc.params, bc);
    }

    for (std::size_t m = 0; m < kinds.size(); ++m) {
        const auto breakdown = min_attack_cost(sc.omega, sc.params, kinds[m]);
        ModelOutcome& out = rec.models[m];
        out.model = kinds[m].name();
        out.min_attack_cost = breakdown.min_cost;
        out.degenerate = breakdown.degenerate;
        out.strong_secure = strong;
        switch (kinds[m].variant()) {
            case ModelKind::Variant::shared:
                out.weak_secure = weak_security(delta, sc.params).secure;
                out.bribery_cost =
                    bribery_cost_single(sc.sigma, sc.params, proportional_lambdas(sc.sigma,
                                                                                  sc.params));
                break;
            case ModelKind::Variant::isolated:
                // tightened threshold: pi must stay strictly below theta * min_j
                out.weak_secure = sc.params.pi < tightened_threshold(sc.omega, sc.params);
                if (!degenerate_pool) {
                    out.bribery_cost = multi.cost;
                }
                break;
            case ModelKind::Variant::single:
                out.weak_secure = deltas[j0] > 0.0 &&
                                  weak_security(deltas[j0], sc.params).secure;
                if (!degenerate_pool) {
                    out.bribery_cost = multi.plans[j0].cost;
                }
                break;
        }
    }
    rec.ordering_violation = !(rec.models[0].min_attack_cost >= rec.models[2].min_attack_cost &&
                               rec.models[2].min_attack_cost >= rec.models[1].min_attack_cost);

    rec.stake = sc.sigma.values();
    rec.honest.resize(n);
    rec.best_attack_shared.resize(n);
    rec.margin_shared.resize(n);
    rec.best_attack_isolated.resize(n);
    rec.margin_isolated.resize(n);
    rec.best_attack_single.resize(n);
    rec.margin_single.resize(n);
    std::vector<double> chain(n);
    const double reward_total = sc.params.total_reward(delta);
    for (std::size_t i = 0; i < n; ++i) {
        rec.honest[i] = honest_utility(i, sc.sigma, sc.params);
        chain[i] = detail::proportional_chain_utility(i, sc.omega, reward_total);
        const auto shared_opt = detail::best_solo_option(i, sc.omega, sc.sigma, deltas, delta,
                                                         cfg.theta, ModelKind::shared());
        const auto isolated_opt = detail::best_solo_option(i, sc.omega, sc.sigma, deltas, delta,
                                                           cfg.theta, ModelKind::isolated());
        const auto single_opt = detail::best_solo_option(i, sc.omega, sc.sigma, deltas, delta,
                                                         cfg.theta, ModelKind::single(j0));
        rec.best_attack_shared[i] = detail::attack_value(shared_opt, sc.params.pi);
        rec.best_attack_isolated[i] = detail::attack_value(isolated_opt, sc.params.pi);
        rec.best_attack_single[i] = detail::attack_value(single_opt, sc.params.pi);
        rec.margin_shared[i] = rec.honest[i] - rec.best_attack_shared[i];
        rec.margin_isolated[i] = rec.honest[i] - rec.best_attack_isolated[i];
        rec.margin_single[i] = rec.honest[i] - rec.best_attack_single[i];
    }
    rec.gini_proportional = gini(rec.honest);
    rec.gini_chain = gini(chain);
    return rec;
}

// Runs every trial on a small worker pool. Each trial owns its substream
// and its output slot, so results are identical for any worker count.
inline TrialResults run_trials(const SimulationConfig& cfg) {
    cfg.validate();
    TrialResults results;
    results.config = cfg;
    results.trials.resize(cfg.n_trials);

    const std::size_t workers = std::max<std::size_t>(1, cfg.workers);
    if (workers == 1) {
        for (std::size_t t = 0; t < cfg.n_trials; ++t) {
            results.trials[t] = run_single_trial(cfg, t);
        }
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_lock;
    std::exception_ptr error;
    auto body = [&]() {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= cfg.n_trials) {
                return;
            }
            try {
                results.trials[t] = run_single_trial(cfg, t);
            } catch (...) {
                std::lock_guard<std::mutex> hold(error_lock);
                if (!error) {
                    error = std::current_exception();
                }
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back(body);
    }
    for (auto& th : pool) {
        th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return results;
}

struct SummaryStat {
    double mean = 0.0;
    double stddev = 0.0;  // population form
    std::size_t count = 0;
};

struct Histogram {
    std::string metric;
    std::vector<double> edges;
    std::vector<std::size_t> counts;  // bin b covers [edges[b], edges[b+1])
    std::size_t below = 0;
    std::size_t above = 0;
};

struct ReportTables {
    std::size_t trials = 0;
    std::map<std::string, SummaryStat> stats;
    std::map<std::string, double> gini_mean;      // per reward scheme
    std::map<std::string, double> ruin_fraction;  // per model, share of M(v_i) < 0
    std::size_t ordering_violations = 0;
    std::size_t degenerate_trials = 0;
    std::vector<Histogram> histograms;
};

namespace detail {

class StatAccumulator {
public:
    void add(double v) {
        if (std::isnan(v)) {
            return;
        }
        sum_ += v;
        sumsq_ += v * v;
        ++count_;
    }

    SummaryStat finish() const {
        SummaryStat s;
        s.count = count_;
        if (count_ > 0) {
            s.mean = sum_ / static_cast<double>(count_);
            s.stddev = std::sqrt(std::max(0.0, sumsq_ / static_cast<double>(count_) -
                                                   s.mean * s.mean));
        }
        return s;
    }

private:
    double sum_ = 0.0;
    double sumsq_ = 0.0;
    std::size_t count_ = 0;
};

inline Histogram make_histogram(const std::string& metric, const std::vector<double>& edges,
                                const std::vector<double>& values) {
    Histogram h;
    h.metric = metric;
    h.edges = edges;
    h.counts.assign(edges.size() - 1, 0);
    for (double v : values) {
        if (v < edges.front()) {
            ++h.below;
        } else if (v >= edges.back()) {
            ++h.above;
        } else {
            const auto at = std::upper_bound(edges.begin(), edges.end(), v);
            ++h.counts[static_cast<std::size_t>(at - edges.begin()) - 1];
        }
    }
    return h;
}

}  // namespace detail

inline ReportTables summarize(const TrialResults& results) {
    ReportTables tables;
    tables.trials = results.trials.size();

    std::map<std::string, detail::StatAccumulator> acc;
    std::map<std::string, std::vector<double>> hist_values;
    std::map<std::string, std::size_t> ruined;
    std::map<std::string, std::size_t> margin_count;
    double gini_prop_sum = 0.0;
    double gini_chain_sum = 0.0;

    for (const auto& rec : results.trials) {
        bool degenerate = false;
        for (const auto& out : rec.models) {
            acc["attack_cost_" + out.model].add(out.min_attack_cost);
            acc["bribery_cost_" + out.model].add(out.bribery_cost);
            degenerate = degenerate || out.degenerate;
        }
        if (degenerate) {
            ++tables.degenerate_trials;
        }
        if (rec.ordering_violation) {
            ++tables.ordering_violations;
        }
        gini_prop_sum += rec.gini_proportional;
        gini_chain_sum += rec.gini_chain;
        acc["gini_proportional"].add(rec.gini_proportional);
        hist_values["gini_proportional"].push_back(rec.gini_proportional);
        hist_values["attack_cost_shared"].push_back(rec.models[0].min_attack_cost);

        auto take_margins = [&](const std::string& model, const std::vector<double>& margins) {
            for (double m : margins) {
                acc["margin_" + model].add(m);
                margin_count[model] += 1;
                if (m < 0.0) {
                    ruined[model] += 1;
                }
            }
        };
        take_margins("shared", rec.margin_shared);
        take_margins("isolated", rec.margin_isolated);
        take_margins("single", rec.margin_single);
        for (double u : rec.honest) {
            acc["honest_utility"].add(u);
        }
        hist_values["margin_isolated"].insert(hist_values["margin_isolated"].end(),
                                              rec.margin_isolated.begin(),
                                              rec.margin_isolated.end());
        hist_values["margin_shared"].insert(hist_values["margin_shared"].end(),
                                            rec.margin_shared.begin(), rec.margin_shared.end());
    }
    for (const auto& [name, a] : acc) {
        tables.stats[name] = a.finish();
    }
    if (!results.trials.empty()) {
        const double n = static_cast<double>(results.trials.size());
        tables.gini_mean["total_stake_proportional"] = gini_prop_sum / n;
        tables.gini_mean["per_ssp_allocated"] = gini_chain_sum / n;
    }
    for (const auto& [model, total] : margin_count) {
        tables.ruin_fraction[model] =
            total == 0 ? 0.0 : static_cast<double>(ruined[model]) / static_cast<double>(total);
    }
    for (const auto& [metric, edges] : results.config.histogram_edges) {
        const auto at = hist_values.find(metric);
        if (at != hist_values.end()) {
            tables.histograms.push_back(detail::make_histogram(metric, edges, at->second));
        }
    }
    return tables;
}

// Appendix-style reward comparison: per-validator rewards under the
// total-stake proportional scheme and under the per-SSP allocated chain.
// The two are algebraically identical, which is asserted per trial; the
// report carries both schemes' dispersion and Gini statistics.
inline ReportTables compare_reward_schemes(const SimulationConfig& cfg) {
    cfg.validate();
    ReportTables tables;
    tables.trials = cfg.n_trials;
    detail::StatAccumulator prop_acc;
    detail::StatAccumulator chain_acc;
    double gini_prop_sum = 0.0;
    double gini_chain_sum = 0.0;

    for (std::size_t t = 0; t < cfg.n_trials; ++t) {
        const Scenario sc = sample_scenario(cfg, t);
        const double delta = total_stake(sc.omega);
        const double reward_total = sc.params.total_reward(delta);
        std::vector<double> prop(sc.sigma.size());
        std::vector<double> chain(sc.sigma.size());
        double prop_mean = 0.0;
        double chain_mean = 0.0;
        for (std::size_t i = 0; i < sc.sigma.size(); ++i) {
            prop[i] = honest_utility(i, sc.sigma, sc.params);
            chain[i] = detail::proportional_chain_utility(i, sc.omega, reward_total);
            prop_mean += prop[i];
            chain_mean += chain[i];
            prop_acc.add(prop[i]);
            chain_acc.add(chain[i]);
        }
        prop_mean /= static_cast<double>(sc.sigma.size());
        chain_mean /= static_cast<double>(sc.sigma.size());
        if (detail::relative_gap(chain_mean, prop_mean) > kFeasibilityTol) {
            throw internal_error("reward schemes disagree on the mean at trial " +
                                 std::to_string(t));
        }
        gini_prop_sum += gini(prop);
        gini_chain_sum += gini(chain);
    }
    tables.stats["reward_total_stake"] = prop_acc.finish();
    tables.stats["reward_per_ssp_allocated"] = chain_acc.finish();
    tables.gini_mean["total_stake_proportional"] = gini_prop_sum / static_cast<double>(cfg.n_trials);
    tables.gini_mean["per_ssp_allocated"] = gini_chain_sum / static_cast<double>(cfg.n_trials);
    return tables;
}

// Volatility-shock study: one SSP's asset volatility is scaled by `factor`
// while every trial reuses the same Gaussian draws (common random numbers),
// isolating the effect of the shock on dollar-denominated security.
struct ShockStudyConfig {
    SimulationConfig base;
    std::size_t shocked_ssp = 0;
    double factor = 3.0;
    double volatility = 0.2;   // sigma of each asset's log price, E[p] = 1
    double correlation = 0.3;  // common pairwise correlation of log prices

    void validate() const {
        base.validate();
        if (shocked_ssp >= base.n_ssps) {
            throw std::invalid_argument("shocked_ssp out of range");
        }
        if (!(factor > 0.0)) {
            throw std::invalid_argument("shock factor must be > 0");
        }
        if (!(volatility > 0.0)) {
            throw std::invalid_argument("volatility must be > 0");
        }
        if (!(correlation >= 0.0 && correlation < 1.0)) {
            throw std::invalid_argument("correlation must lie in [0, 1)");
        }
    }
};

struct ShockReport {
    std::size_t trials = 0;
    double var_weakest_base = 0.0;     // Var over trials of min_j Delta_j in USD
    double var_weakest_shocked = 0.0;
    double mean_margin_isolated_base = 0.0;
    double mean_margin_isolated_shocked = 0.0;
    double margin_shift = 0.0;  // shocked minus base; the shock should push this below 0
    std::size_t ordering_violations_shocked = 0;
};

inline ShockReport run_shock_study(const ShockStudyConfig& cfg) {
    cfg.validate();
    const std::size_t k = cfg.base.n_ssps;

    std::vector<std::vector<double>> corr(k, std::vector<double>(k, cfg.correlation));
    for (std::size_t j = 0; j < k; ++j) {
        corr[j][j] = 1.0;
    }
    const auto chol = cholesky(corr);

    ShockReport report;
    report.trials = cfg.base.n_trials;
    detail::StatAccumulator weakest_base;
    detail::StatAccumulator weakest_shocked;
    detail::StatAccumulator margin_base;
    detail::StatAccumulator margin_shocked;

    constexpr std::uint64_t kPriceStream = std::uint64_t{1} << 32;
    for (std::size_t t = 0; t < cfg.base.n_trials; ++t) {
        const Scenario sc = sample_scenario(cfg.base, t);
        const auto deltas = sc.omega.column_sums();
        RandomStream price_rng(cfg.base.seed, kPriceStream + t);
        std::vector<double> z(k);
        for (auto& v : z) {
            v = price_rng.normal();
        }
        std::vector<double> g(k, 0.0);
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b <= a; ++b) {
                g[a] += chol[a][b] * z[b];
            }
        }
        auto price = [&](std::size_t j, bool shocked) {
            const double vol = (shocked && j == cfg.shocked_ssp) ? cfg.volatility * cfg.factor
                                                                 : cfg.volatility;
            return std::exp(vol * g[j] - 0.5 * vol * vol);
        };
        auto usd_metrics = [&](bool shocked, double* weakest, double* mean_margin,
                               bool* violation) {
            std::vector<double> usd(k);
            double total = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                usd[j] = deltas[j] * price(j, shocked);
                total += usd[j];
            }
            const double lo = *std::min_element(usd.begin(), usd.end());
            const double hi = *std::max_element(usd.begin(), usd.end());
            *weakest = lo;
            *violation = !(cfg.base.theta * total >= cfg.base.theta * hi &&
                           cfg.base.theta * hi >= cfg.base.theta * lo);
            double margins = 0.0;
            for (std::size_t i = 0; i < sc.sigma.size(); ++i) {
                double stake_usd = 0.0;
                bool feasible = false;
                double cost = 0.0;
                for (std::size_t j = 0; j < k; ++j) {
                    stake_usd += sc.omega(i, j) * price(j, shocked);
                    if (deltas[j] > 0.0 && sc.omega(i, j) >= cfg.base.theta * deltas[j]) {
                        const double c = cfg.base.theta * usd[j];
                        if (!feasible || c < cost) {
                            feasible = true;
                            cost = c;
                        }
                    }
                }
                const double attack = feasible ? std::max(0.0, sc.params.pi - cost) : 0.0;
                margins += sc.params.r * stake_usd - attack;
            }
            *mean_margin = margins / static_cast<double>(sc.sigma.size());
        };
        double w = 0.0;
        double m = 0.0;
        bool violation = false;
        usd_metrics(false, &w, &m, &violation);
        weakest_base.add(w);
        margin_base.add(m);
        usd_metrics(true, &w, &m, &violation);
        weakest_shocked.add(w);
        margin_shocked.add(m);
        if (violation) {
            ++report.ordering_violations_shocked;
        }
    }
    const auto wb = weakest_base.finish();
    const auto ws = weakest_shocked.finish();
    const auto mb = margin_base.finish();
    const auto ms = margin_shocked.finish();
    report.var_weakest_base = wb.stddev * wb.stddev;
    report.var_weakest_shocked = ws.stddev * ws.stddev;
    report.mean_margin_isolated_base = mb.mean;
    report.mean_margin_isolated_shocked = ms.mean;
    report.margin_shift = ms.mean - mb.mean;
    return report;
}

}  // namespace sspsec
