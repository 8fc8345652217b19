#pragma once

// Serializes simulation results into the published artifact set:
// trials.csv (one row per trial per model), validators.csv (one row per
// trial per validator), and summary.json (aggregate tables). All numeric
// fields are written with round-trip precision and key order is fixed,
// so identical runs produce byte-identical files.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "sspsec/csv.hpp"
#include "sspsec/simulate.hpp"

namespace sspsec {

inline std::string format_trials_csv(const TrialResults& results) {
    std::string out =
        "trial,model,pi,r,theta,total_stake,min_pool_stake,single_pool,min_attack_cost,"
        "weak_secure,strong_secure,bribery_cost,degenerate,ordering_violation,"
        "gini_proportional\n";
    for (const auto& rec : results.trials) {
        for (const auto& model : rec.models) {
            out += std::to_string(rec.trial);
            out += ',';
            out += model.model;
            out += ',';
            out += csv::fmt(rec.pi);
            out += ',';
            out += csv::fmt(rec.r);
            out += ',';
            out += csv::fmt(rec.theta);
            out += ',';
            out += csv::fmt(rec.total_stake);
            out += ',';
            out += csv::fmt(rec.min_pool);
            out += ',';
            out += std::to_string(rec.single_pool);
            out += ',';
            out += csv::fmt(model.min_attack_cost);
            out += ',';
            out += model.weak_secure ? '1' : '0';
            out += ',';
            out += model.strong_secure ? '1' : '0';
            out += ',';
            out += csv::fmt(model.bribery_cost);
            out += ',';
            out += model.degenerate ? '1' : '0';
            out += ',';
            out += rec.ordering_violation ? '1' : '0';
            out += ',';
            out += csv::fmt(rec.gini_proportional);
            out += '\n';
        }
    }
    return out;
}

inline std::string format_validators_csv(const TrialResults& results) {
    std::string out =
        "trial,validator,stake,honest_utility,best_attack_shared,margin_shared,"
        "best_attack_isolated,margin_isolated,best_attack_single,margin_single\n";
    for (const auto& rec : results.trials) {
        for (std::size_t i = 0; i < rec.stake.size(); ++i) {
            out += std::to_string(rec.trial);
            out += ',';
            out += std::to_string(i);
            out += ',';
            out += csv::fmt(rec.stake[i]);
            out += ',';
            out += csv::fmt(rec.honest[i]);
            out += ',';
            out += csv::fmt(rec.best_attack_shared[i]);
            out += ',';
            out += csv::fmt(rec.margin_shared[i]);
            out += ',';
            out += csv::fmt(rec.best_attack_isolated[i]);
            out += ',';
            out += csv::fmt(rec.margin_isolated[i]);
            out += ',';
            out += csv::fmt(rec.best_attack_single[i]);
            out += ',';
            out += csv::fmt(rec.margin_single[i]);
            out += '\n';
        }
    }
    return out;
}

// The config echo deliberately omits `workers`: worker count is an
// execution detail and must not change any published byte.
inline nlohmann::json summary_json(const TrialResults& results, const ReportTables& tables) {
    const auto& cfg = results.config;
    nlohmann::json config;
    config["n_operators"] = cfg.n_operators;
    config["n_ssps"] = cfg.n_ssps;
    config["n_trials"] = cfg.n_trials;
    config["seed"] = cfg.seed;
    config["theta"] = cfg.theta;
    config["reward_mode"] = cfg.reward_mode == RewardMode::rate ? "rate" : "amount";
    config["stake_dist"] = {{"lo", cfg.stake_dist.lo}, {"hi", cfg.stake_dist.hi}};
    config["rate_dist"] = {{"lo", cfg.rate_dist.lo}, {"hi", cfg.rate_dist.hi}};
    config["reward_dist"] = {{"lo", cfg.reward_dist.lo}, {"hi", cfg.reward_dist.hi}};
    config["pi_dist"] = {{"lo", cfg.pi_dist.lo}, {"hi", cfg.pi_dist.hi}};

    nlohmann::json stats;
    for (const auto& [name, s] : tables.stats) {
        stats[name] = {{"mean", s.mean}, {"stddev", s.stddev}, {"count", s.count}};
    }
    nlohmann::json histograms = nlohmann::json::array();
    for (const auto& h : tables.histograms) {
        histograms.push_back({{"metric", h.metric},
                              {"edges", h.edges},
                              {"counts", h.counts},
                              {"below", h.below},
                              {"above", h.above}});
    }
    nlohmann::json doc;
    doc["config"] = config;
    doc["trials"] = tables.trials;
    doc["stats"] = stats;
    doc["gini_mean"] = tables.gini_mean;
    doc["ruin_fraction"] = tables.ruin_fraction;
    doc["ordering_violations"] = tables.ordering_violations;
    doc["degenerate_trials"] = tables.degenerate_trials;
    doc["histograms"] = histograms;
    return doc;
}

inline void write_simulation_artifacts(const TrialResults& results, const ReportTables& tables,
                                       const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    csv::write_file(out_dir + "/trials.csv", format_trials_csv(results));
    csv::write_file(out_dir + "/validators.csv", format_validators_csv(results));
    csv::write_file(out_dir + "/summary.json", summary_json(results, tables).dump(2) + "\n");
}

}  // namespace sspsec
