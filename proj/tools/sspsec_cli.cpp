// sspsec command line: security verdicts, maximin allocation, bribery
// costs, price-risk matrices, and the Monte Carlo model comparison.
//
// Global flags: --config PATH (flat JSON, unknown keys rejected),
// --out DIR, --seed N, --format {csv,json}. Command-line flags override
// config file values. Every numeric input accepts decimals and simple
// fractions ("1/3"). Exit codes: 0 success, 2 input/validation error,
// 3 internal invariant violation.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sspsec/allocation.hpp"
#include "sspsec/bribery.hpp"
#include "sspsec/csv.hpp"
#include "sspsec/model.hpp"
#include "sspsec/report.hpp"
#include "sspsec/risk.hpp"
#include "sspsec/security.hpp"
#include "sspsec/simulate.hpp"

namespace {

using nlohmann::json;

double number_arg(const std::string& text, const std::string& what) {
    return sspsec::csv::parse_number_or_fraction(text, what);
}

std::uint64_t count_arg(const std::string& text, const std::string& what) {
    if (text.empty()) {
        throw std::invalid_argument(what + ": empty count");
    }
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (errno != 0 || end != text.c_str() + text.size()) {
        throw std::invalid_argument(what + ": not a nonnegative integer: " + text);
    }
    return static_cast<std::uint64_t>(v);
}

std::vector<double> list_arg(const std::string& text, const std::string& what) {
    std::vector<double> values;
    for (const auto& field : sspsec::csv::split(text)) {
        values.push_back(number_arg(sspsec::csv::trim(field), what));
    }
    return values;
}

// Flat JSON config document; values may be numbers or fraction strings.
class ConfigDoc {
public:
    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw std::invalid_argument("cannot open config file: " + path);
        }
        try {
            in >> doc_;
        } catch (const json::exception& e) {
            throw std::invalid_argument(path + ": " + e.what());
        }
        if (!doc_.is_object()) {
            throw std::invalid_argument(path + ": config must be a JSON object");
        }
    }

    void check_keys(const std::set<std::string>& allowed) const {
        for (auto it = doc_.begin(); it != doc_.end(); ++it) {
            if (allowed.find(it.key()) == allowed.end()) {
                throw std::invalid_argument("unknown config key: " + it.key());
            }
        }
    }

    bool has(const std::string& key) const { return doc_.contains(key); }

    const json& raw(const std::string& key) const { return doc_.at(key); }

    // Any scalar as text, so flags and config share one parsing path.
    std::string text(const std::string& key) const {
        const json& v = doc_.at(key);
        if (v.is_string()) {
            return v.get<std::string>();
        }
        if (v.is_number() || v.is_boolean()) {
            return v.dump();
        }
        throw std::invalid_argument("config key " + key + " must be a scalar");
    }

private:
    json doc_ = json::object();
};

// Config file value applies only when the flag was not given.
void overlay(const ConfigDoc& cfg, const std::string& key, const CLI::Option* opt,
             std::string& target) {
    if (opt->count() == 0 && cfg.has(key)) {
        target = cfg.text(key);
    }
}

struct Global {
    std::string config_path;
    std::string out_dir = "out";
    std::string seed_text;
    std::string format = "json";
    ConfigDoc config;

    std::optional<std::uint64_t> seed() const {
        if (seed_text.empty()) {
            return std::nullopt;
        }
        return count_arg(seed_text, "--seed");
    }
};

void flatten(const json& v, const std::string& prefix, std::string& out) {
    if (v.is_object()) {
        for (auto it = v.begin(); it != v.end(); ++it) {
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
        }
    } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            flatten(v[i], prefix + "[" + std::to_string(i) + "]", out);
        }
    } else {
        out += prefix;
        out += ',';
        out += v.is_string() ? v.get<std::string>() : v.dump();
        out += '\n';
    }
}

// Reports honor --format; tabular artifacts are always CSV.
void write_report(const json& doc, const Global& g, const std::string& name) {
    std::filesystem::create_directories(g.out_dir);
    if (g.format == "csv") {
        std::string body = "key,value\n";
        flatten(doc, "", body);
        sspsec::csv::write_file(g.out_dir + "/" + name + ".csv", body);
        std::cout << "wrote " << g.out_dir << "/" << name << ".csv\n";
    } else {
        sspsec::csv::write_file(g.out_dir + "/" + name + ".json", doc.dump(2) + "\n");
        std::cout << "wrote " << g.out_dir << "/" << name << ".json\n";
    }
}

const char* binding_name(sspsec::BindingConstraint b) {
    switch (b) {
        case sspsec::BindingConstraint::weak_threshold:
            return "weak_threshold";
        case sspsec::BindingConstraint::strong_average:
            return "strong_average";
        case sspsec::BindingConstraint::per_ssp_min:
            return "per_ssp_min";
    }
    return "unknown";
}

json verdict_json(const sspsec::SecurityVerdict& v) {
    return {{"secure", v.secure}, {"margin", v.margin}, {"binding", binding_name(v.binding)}};
}

json breakdown_json(const sspsec::AttackCostBreakdown& b) {
    json out;
    out["model"] = b.model.name();
    out["min_attack_cost"] = b.min_cost;
    if (b.weakest_ssp) {
        out["weakest_ssp"] = *b.weakest_ssp;
    }
    out["per_ssp_costs"] = b.per_ssp_costs;
    out["degenerate"] = b.degenerate;
    return out;
}

json plan_json(const sspsec::BriberyPlan& p) {
    return {{"ssp", p.ssp},
            {"coalition", p.coalition},
            {"lambda_star", p.lambda_star},
            {"coalition_stake", p.coalition_stake},
            {"cost", p.cost}};
}

sspsec::AllocationMatrix matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) {
        throw std::invalid_argument("omega must be a nonempty array of rows");
    }
    std::vector<std::vector<double>> cells;
    for (const auto& row : rows) {
        if (!row.is_array()) {
            throw std::invalid_argument("omega rows must be arrays");
        }
        std::vector<double> r;
        for (const auto& v : row) {
            if (!v.is_number()) {
                throw std::invalid_argument("omega entries must be numbers");
            }
            r.push_back(v.get<double>());
        }
        cells.push_back(std::move(r));
    }
    return sspsec::AllocationMatrix(cells);
}

std::vector<double> stakes_from_json(const json& v) {
    if (!v.is_array() || v.empty()) {
        throw std::invalid_argument("stakes must be a nonempty array");
    }
    std::vector<double> out;
    for (const auto& e : v) {
        if (e.is_number()) {
            out.push_back(e.get<double>());
        } else if (e.is_string()) {
            out.push_back(number_arg(e.get<std::string>(), "stakes"));
        } else {
            throw std::invalid_argument("stakes entries must be numbers");
        }
    }
    return out;
}

// Shared input plumbing for commands that consume omega and sigma.
struct MatrixInputs {
    std::string alloc_path;
    std::string stakes_inline;
    std::string stakes_file;
    CLI::Option* alloc_opt = nullptr;
    CLI::Option* stakes_opt = nullptr;
    CLI::Option* stakes_file_opt = nullptr;

    void attach(CLI::App* cmd) {
        alloc_opt = cmd->add_option("--alloc", alloc_path,
                                    "Allocation matrix CSV (validator id, one column per SSP)");
        stakes_opt = cmd->add_option("--stakes", stakes_inline,
                                     "Inline stake list, e.g. 10,40,60");
        stakes_file_opt =
            cmd->add_option("--stakes-file", stakes_file, "Stake table CSV (validator,stake)");
    }

    void overlay_config(const ConfigDoc& cfg) {
        overlay(cfg, "alloc", alloc_opt, alloc_path);
        overlay(cfg, "stakes_file", stakes_file_opt, stakes_file);
        if (stakes_opt->count() == 0 && cfg.has("stakes") && cfg.raw("stakes").is_string()) {
            stakes_inline = cfg.text("stakes");
        }
    }

    sspsec::AllocationMatrix load_matrix(const ConfigDoc& cfg) const {
        if (!alloc_path.empty()) {
            return sspsec::csv::read_allocation(alloc_path).omega;
        }
        if (cfg.has("omega")) {
            return matrix_from_json(cfg.raw("omega"));
        }
        throw std::invalid_argument("need an allocation: --alloc PATH or config key omega");
    }

    std::optional<sspsec::StakeTable> load_stakes(const ConfigDoc& cfg) const {
        if (!stakes_inline.empty()) {
            return sspsec::StakeTable(list_arg(stakes_inline, "--stakes"));
        }
        if (!stakes_file.empty()) {
            return sspsec::csv::read_stakes(stakes_file);
        }
        if (cfg.has("stakes") && cfg.raw("stakes").is_array()) {
            return sspsec::StakeTable(stakes_from_json(cfg.raw("stakes")));
        }
        return std::nullopt;
    }
};

const std::set<std::string> kGlobalKeys{"out", "seed", "format"};

std::set<std::string> with_global(std::initializer_list<const char*> keys) {
    std::set<std::string> s(kGlobalKeys);
    s.insert(keys.begin(), keys.end());
    return s;
}

int cmd_security(const Global& g, const MatrixInputs& inputs, const std::string& pi_text,
                 const std::string& theta_text, const std::string& rate_text,
                 const std::string& reward_text) {
    const auto omega = inputs.load_matrix(g.config);
    const auto explicit_sigma = inputs.load_stakes(g.config);
    const sspsec::StakeTable sigma =
        explicit_sigma ? *explicit_sigma : sspsec::implied_stakes(omega);

    const auto report = sspsec::validate_allocation(omega, sigma);
    if (!report.feasible()) {
        for (const auto& v : report.violations) {
            std::cerr << v.describe() << "\n";
        }
        return 2;
    }
    std::optional<double> reward;
    if (!reward_text.empty()) {
        reward = number_arg(reward_text, "--reward");
    }
    const sspsec::EconomicParams params(number_arg(pi_text, "--pi"),
                                        number_arg(theta_text, "--theta"),
                                        number_arg(rate_text, "--rate"), reward);
    const double delta = sspsec::total_stake(omega);
    params.check_reward_consistency(delta);

    sspsec::AttackPlan full(omega.validators(), omega.ssps());
    for (std::size_t i = 0; i < omega.validators(); ++i) {
        for (std::size_t j = 0; j < omega.ssps(); ++j) {
            full(i, j) = omega(i, j);
        }
    }
    const sspsec::EconomicParams resolved(params.pi, params.theta, params.r,
                                          params.total_reward(delta));

    json doc;
    doc["delta"] = delta;
    doc["per_ssp_stake"] = omega.column_sums();
    doc["params"] = {{"pi", params.pi},
                     {"theta", params.theta},
                     {"r", params.r},
                     {"reward", params.total_reward(delta)}};
    doc["weak"] = verdict_json(sspsec::weak_security(delta, params));
    doc["strong"] = verdict_json(sspsec::strong_security(full, resolved, omega.validators()));
    const auto bound = sspsec::validator_bound(delta, params);
    doc["validator_bound"] = {{"unbounded", bound.unbounded},
                              {"max_n", bound.max_n},
                              {"raw_bound", bound.raw_bound}};
    doc["tightened_threshold"] = sspsec::tightened_threshold(omega, params);
    json models = json::array();
    for (const auto& kind :
         {sspsec::ModelKind::shared(), sspsec::ModelKind::isolated(),
          sspsec::ModelKind::single(sspsec::default_single_pool(omega))}) {
        models.push_back(breakdown_json(sspsec::min_attack_cost(omega, params, kind)));
    }
    doc["models"] = models;
    write_report(doc, g, "security");
    return 0;
}

int cmd_optimize(const Global& g, const MatrixInputs& inputs, const std::string& ssps_text,
                 const std::string& pi_text, const std::string& theta_text,
                 const std::string& rate_text, const std::string& probes_text) {
    const auto explicit_sigma = inputs.load_stakes(g.config);
    if (!explicit_sigma) {
        throw std::invalid_argument("need stakes: --stakes, --stakes-file, or config key stakes");
    }
    const std::size_t k = static_cast<std::size_t>(count_arg(ssps_text, "--ssps"));
    const sspsec::EconomicParams params(number_arg(pi_text, "--pi"),
                                        number_arg(theta_text, "--theta"),
                                        number_arg(rate_text, "--rate"));
    const auto omega = sspsec::maximin_allocate(*explicit_sigma, k);
    const std::size_t probes = static_cast<std::size_t>(count_arg(probes_text, "--probes"));
    const auto eq = sspsec::equilibrium_check(omega, *explicit_sigma, params, probes);

    std::filesystem::create_directories(g.out_dir);
    sspsec::csv::write_file(g.out_dir + "/omega_star.csv", sspsec::csv::format_allocation(omega));
    std::cout << "wrote " << g.out_dir << "/omega_star.csv\n";

    const double delta = sspsec::total_stake(omega);
    json doc;
    doc["delta"] = delta;
    doc["k"] = k;
    doc["per_ssp_stake"] = omega.column_sums();
    doc["min_cost"] = sspsec::equilibrium_min_cost(delta, k, params.theta);
    doc["equilibrium"] = {{"equalized", eq.equalized},
                          {"delta_spread", eq.delta_spread},
                          {"min_cost", eq.min_cost},
                          {"utility_invariant", eq.utility_invariant},
                          {"deviation_gain", eq.deviation_gain}};
    write_report(doc, g, "optimize");
    return 0;
}

int cmd_bribery(const Global& g, const MatrixInputs& inputs, const std::string& pi_text,
                const std::string& theta_text, const std::string& rate_text,
                const std::string& exact_limit_text) {
    const auto omega = inputs.load_matrix(g.config);
    const auto explicit_sigma = inputs.load_stakes(g.config);
    const sspsec::StakeTable sigma =
        explicit_sigma ? *explicit_sigma : sspsec::implied_stakes(omega);
    sspsec::require_feasible(omega, sigma);

    const sspsec::EconomicParams params(number_arg(pi_text, "--pi"),
                                        number_arg(theta_text, "--theta"),
                                        number_arg(rate_text, "--rate"));
    sspsec::BriberyConfig bc;
    bc.theta = params.theta;
    bc.exact_limit = static_cast<std::size_t>(count_arg(exact_limit_text, "--exact-limit"));

    const auto multi = sspsec::bribery_cost_multi(omega, sigma, params, bc);
    const double single =
        sspsec::bribery_cost_single(sigma, params, sspsec::proportional_lambdas(sigma, params));

    std::string table = "ssp,lambda_star,coalition_stake,cost,coalition_size,coalition\n";
    for (const auto& plan : multi.plans) {
        table += std::to_string(plan.ssp);
        table += ',';
        table += sspsec::csv::fmt(plan.lambda_star);
        table += ',';
        table += sspsec::csv::fmt(plan.coalition_stake);
        table += ',';
        table += sspsec::csv::fmt(plan.cost);
        table += ',';
        table += std::to_string(plan.coalition.size());
        table += ',';
        for (std::size_t c = 0; c < plan.coalition.size(); ++c) {
            if (c > 0) {
                table += ';';
            }
            table += std::to_string(plan.coalition[c]);
        }
        table += '\n';
    }
    std::filesystem::create_directories(g.out_dir);
    sspsec::csv::write_file(g.out_dir + "/bribery_plans.csv", table);
    std::cout << "wrote " << g.out_dir << "/bribery_plans.csv\n";

    json doc;
    doc["c_multi"] = multi.cost;
    doc["weakest_ssp"] = multi.weakest;
    doc["c_single"] = single;
    doc["single_minus_multi"] = single - multi.cost;
    json plans = json::array();
    for (const auto& plan : multi.plans) {
        plans.push_back(plan_json(plan));
    }
    doc["plans"] = plans;
    write_report(doc, g, "bribery");
    return 0;
}

int cmd_risk(const Global& g, const std::string& prices_path, const std::string& theta_text,
             const std::string& shock_asset, const std::string& shock_factor_text) {
    const auto series = sspsec::ingest_prices(prices_path);
    const auto returns = sspsec::align_returns(series);
    const auto corr = sspsec::correlation_matrix(returns);
    const auto cov = sspsec::estimate_cov(returns);
    const double theta = number_arg(theta_text, "--theta");
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::invalid_argument("theta must lie in (0, 1)");
    }

    std::filesystem::create_directories(g.out_dir);
    sspsec::csv::write_file(g.out_dir + "/correlation.csv",
                            sspsec::format_correlation_csv(corr));
    sspsec::csv::write_file(g.out_dir + "/covariance.csv", sspsec::format_covariance_csv(cov));
    std::cout << "wrote " << g.out_dir << "/correlation.csv\n";
    std::cout << "wrote " << g.out_dir << "/covariance.csv\n";

    // prices at common dates, for level-based dominance comparisons
    std::vector<std::vector<double>> levels(series.size());
    {
        std::map<std::string, std::size_t> date_hits;
        for (const auto& s : series) {
            for (const auto& d : s.dates) {
                ++date_hits[d];
            }
        }
        for (std::size_t a = 0; a < series.size(); ++a) {
            for (std::size_t t = 0; t < series[a].dates.size(); ++t) {
                if (date_hits[series[a].dates[t]] == series.size()) {
                    levels[a].push_back(series[a].prices[t]);
                }
            }
        }
    }
    json fsd = json::array();
    for (std::size_t a = 0; a < series.size(); ++a) {
        for (std::size_t b = 0; b < series.size(); ++b) {
            if (a == b) {
                continue;
            }
            const auto res = sspsec::fsd_check(levels[a], levels[b], theta);
            json entry;
            entry["a"] = series[a].asset;
            entry["b"] = series[b].asset;
            entry["b_dominates_a"] = res.dominates;
            entry["expected_cost_bound"] = res.bound;
            if (res.paired_min_mean) {
                entry["paired_min_mean"] = *res.paired_min_mean;
            }
            if (res.paired_bound_ok) {
                entry["paired_bound_ok"] = *res.paired_bound_ok;
            }
            fsd.push_back(entry);
        }
    }
    json doc;
    json assets = json::array();
    for (std::size_t a = 0; a < series.size(); ++a) {
        assets.push_back({{"asset", series[a].asset},
                          {"observations", series[a].prices.size()},
                          {"zero_variance", static_cast<bool>(corr.zero_variance[a])}});
    }
    doc["assets"] = assets;
    // Table-style correlation matrix, rounded like the CSV; undefined
    // entries (zero-variance assets) become null
    json corr_rows = json::array();
    for (std::size_t a = 0; a < corr.assets.size(); ++a) {
        json row = json::array();
        for (std::size_t b = 0; b < corr.assets.size(); ++b) {
            const double v = corr.matrix[a][b];
            if (std::isnan(v)) {
                row.push_back(nullptr);
            } else {
                row.push_back(std::round(v * 1e4) / 1e4);
            }
        }
        corr_rows.push_back(std::move(row));
    }
    doc["correlation"] = corr_rows;
    doc["return_rows"] = returns.returns.size();
    doc["fsd"] = fsd;

    if (!shock_asset.empty()) {
        const double factor = number_arg(shock_factor_text, "--shock-factor");
        const auto shocked = sspsec::volatility_shock(cov, shock_asset, factor);
        sspsec::csv::write_file(g.out_dir + "/covariance_shocked.csv",
                                sspsec::format_covariance_csv(shocked));
        std::cout << "wrote " << g.out_dir << "/covariance_shocked.csv\n";
        const std::size_t idx = cov.index_of(shock_asset);
        doc["shock"] = {{"asset", shock_asset},
                        {"factor", factor},
                        {"variance_before", cov.variances[idx]},
                        {"variance_after", shocked.variances[idx]}};
    }
    write_report(doc, g, "risk");
    return 0;
}

int cmd_simulate(const Global& g, sspsec::SimulationConfig cfg, bool seed_given) {
    if (!seed_given) {
        std::random_device rd;
        cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        std::cout << "seed not given; drew " << cfg.seed << " (recorded in summary.json)\n";
    }
    const auto results = sspsec::run_trials(cfg);
    const auto tables = sspsec::summarize(results);
    sspsec::write_simulation_artifacts(results, tables, g.out_dir);
    std::cout << "wrote " << g.out_dir << "/trials.csv, validators.csv, summary.json ("
              << cfg.n_trials << " trials, seed " << cfg.seed << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Economic security toolkit for restaked validator networks"};
    app.require_subcommand(1);
    app.fallthrough();

    Global g;
    auto* config_opt = app.add_option("--config", g.config_path, "JSON config file");
    auto* out_opt = app.add_option("--out", g.out_dir, "Output directory (default: out)");
    auto* seed_opt = app.add_option("--seed", g.seed_text, "RNG seed");
    auto* format_opt =
        app.add_option("--format", g.format, "Report format: json (default) or csv")
            ->check(CLI::IsMember({"csv", "json"}));

    // security
    auto* sec = app.add_subcommand("security", "Security verdicts for a stake allocation");
    MatrixInputs sec_in;
    sec_in.attach(sec);
    std::string sec_pi, sec_theta = "1/3", sec_rate = "0", sec_reward;
    auto* sec_pi_opt = sec->add_option("--pi", sec_pi, "Attack profit");
    auto* sec_theta_opt = sec->add_option("--theta", sec_theta, "Capture threshold (default 1/3)");
    auto* sec_rate_opt = sec->add_option("--rate", sec_rate, "Reward rate r (default 0)");
    auto* sec_reward_opt = sec->add_option("--reward", sec_reward, "Total reward R (default r*Delta)");

    // optimize
    auto* opt = app.add_subcommand("optimize", "Maximin stake allocation across k SSPs");
    MatrixInputs opt_in;
    opt_in.attach(opt);
    std::string opt_ssps, opt_pi = "0", opt_theta = "1/3", opt_rate = "0.1", opt_probes = "200";
    auto* opt_ssps_opt = opt->add_option("--ssps", opt_ssps, "Number of SSPs k");
    auto* opt_pi_opt = opt->add_option("--pi", opt_pi, "Attack profit (default 0)");
    auto* opt_theta_opt = opt->add_option("--theta", opt_theta, "Capture threshold (default 1/3)");
    auto* opt_rate_opt = opt->add_option("--rate", opt_rate, "Reward rate r (default 0.1)");
    auto* opt_probes_opt =
        opt->add_option("--probes", opt_probes, "Random deviation probes (default 200)");

    // bribery
    auto* bri = app.add_subcommand("bribery", "Cheapest bribing coalitions per SSP");
    MatrixInputs bri_in;
    bri_in.attach(bri);
    std::string bri_pi, bri_theta = "1/3", bri_rate = "0.1", bri_exact = "28";
    auto* bri_pi_opt = bri->add_option("--pi", bri_pi, "Attack profit");
    auto* bri_theta_opt = bri->add_option("--theta", bri_theta, "Capture threshold (default 1/3)");
    auto* bri_rate_opt = bri->add_option("--rate", bri_rate, "Reward rate r (default 0.1)");
    auto* bri_exact_opt =
        bri->add_option("--exact-limit", bri_exact, "Largest eligible set solved exactly");

    // risk
    auto* rsk = app.add_subcommand("risk", "Correlation, covariance, shocks, and dominance");
    std::string rsk_prices, rsk_theta = "1/3", rsk_shock_asset, rsk_shock_factor = "3";
    auto* rsk_prices_opt =
        rsk->add_option("--prices", rsk_prices, "Price CSV with header date,asset,close");
    auto* rsk_theta_opt = rsk->add_option("--theta", rsk_theta, "Capture threshold (default 1/3)");
    auto* rsk_asset_opt =
        rsk->add_option("--shock-asset", rsk_shock_asset, "Asset to shock (optional)");
    auto* rsk_factor_opt =
        rsk->add_option("--shock-factor", rsk_shock_factor, "Volatility multiplier (default 3)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo comparison of the architectures");
    std::string sim_trials = "1000", sim_operators = "20", sim_ssps = "10", sim_theta = "1/3";
    std::string sim_workers = "1", sim_mode = "rate";
    std::string sim_stake_lo = "10", sim_stake_hi = "100", sim_rate_lo = "0.05",
                sim_rate_hi = "0.5";
    std::string sim_reward_lo = "5", sim_reward_hi = "20", sim_pi_lo = "10000",
                sim_pi_hi = "80000";
    auto* sim_trials_opt = sim->add_option("--trials", sim_trials, "Trial count (default 1000)");
    auto* sim_operators_opt =
        sim->add_option("--operators", sim_operators, "Validators per trial (default 20)");
    auto* sim_ssps_opt = sim->add_option("--ssps", sim_ssps, "SSPs per trial (default 10)");
    auto* sim_theta_opt = sim->add_option("--theta", sim_theta, "Capture threshold (default 1/3)");
    auto* sim_workers_opt = sim->add_option("--workers", sim_workers, "Worker threads (default 1)");
    auto* sim_mode_opt = sim->add_option("--reward-mode", sim_mode, "rate or amount")
                             ->check(CLI::IsMember({"rate", "amount"}));
    auto* sim_stake_lo_opt = sim->add_option("--stake-lo", sim_stake_lo, "Stake draw lower bound");
    auto* sim_stake_hi_opt = sim->add_option("--stake-hi", sim_stake_hi, "Stake draw upper bound");
    auto* sim_rate_lo_opt = sim->add_option("--rate-lo", sim_rate_lo, "Rate draw lower bound");
    auto* sim_rate_hi_opt = sim->add_option("--rate-hi", sim_rate_hi, "Rate draw upper bound");
    auto* sim_reward_lo_opt =
        sim->add_option("--reward-lo", sim_reward_lo, "Reward draw lower bound");
    auto* sim_reward_hi_opt =
        sim->add_option("--reward-hi", sim_reward_hi, "Reward draw upper bound");
    auto* sim_pi_lo_opt = sim->add_option("--pi-lo", sim_pi_lo, "Profit draw lower bound");
    auto* sim_pi_hi_opt = sim->add_option("--pi-hi", sim_pi_hi, "Profit draw upper bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!g.config_path.empty()) {
            g.config.load(g.config_path);
        }
        overlay(g.config, "out", out_opt, g.out_dir);
        overlay(g.config, "seed", seed_opt, g.seed_text);
        overlay(g.config, "format", format_opt, g.format);
        if (g.format != "csv" && g.format != "json") {
            throw std::invalid_argument("format must be csv or json");
        }
        (void)config_opt;

        if (app.got_subcommand(sec)) {
            g.config.check_keys(with_global(
                {"alloc", "omega", "stakes", "stakes_file", "pi", "theta", "rate", "reward"}));
            sec_in.overlay_config(g.config);
            overlay(g.config, "pi", sec_pi_opt, sec_pi);
            overlay(g.config, "theta", sec_theta_opt, sec_theta);
            overlay(g.config, "rate", sec_rate_opt, sec_rate);
            overlay(g.config, "reward", sec_reward_opt, sec_reward);
            if (sec_pi.empty()) {
                throw std::invalid_argument("security needs --pi (or config key pi)");
            }
            return cmd_security(g, sec_in, sec_pi, sec_theta, sec_rate, sec_reward);
        }
        if (app.got_subcommand(opt)) {
            g.config.check_keys(with_global(
                {"stakes", "stakes_file", "ssps", "pi", "theta", "rate", "probes"}));
            opt_in.overlay_config(g.config);
            overlay(g.config, "ssps", opt_ssps_opt, opt_ssps);
            overlay(g.config, "pi", opt_pi_opt, opt_pi);
            overlay(g.config, "theta", opt_theta_opt, opt_theta);
            overlay(g.config, "rate", opt_rate_opt, opt_rate);
            overlay(g.config, "probes", opt_probes_opt, opt_probes);
            if (opt_ssps.empty()) {
                throw std::invalid_argument("optimize needs --ssps (or config key ssps)");
            }
            return cmd_optimize(g, opt_in, opt_ssps, opt_pi, opt_theta, opt_rate, opt_probes);
        }
        if (app.got_subcommand(bri)) {
            g.config.check_keys(with_global({"alloc", "omega", "stakes", "stakes_file", "pi",
                                             "theta", "rate", "exact_limit"}));
            bri_in.overlay_config(g.config);
            overlay(g.config, "pi", bri_pi_opt, bri_pi);
            overlay(g.config, "theta", bri_theta_opt, bri_theta);
            overlay(g.config, "rate", bri_rate_opt, bri_rate);
            overlay(g.config, "exact_limit", bri_exact_opt, bri_exact);
            if (bri_pi.empty()) {
                throw std::invalid_argument("bribery needs --pi (or config key pi)");
            }
            return cmd_bribery(g, bri_in, bri_pi, bri_theta, bri_rate, bri_exact);
        }
        if (app.got_subcommand(rsk)) {
            g.config.check_keys(
                with_global({"prices", "theta", "shock_asset", "shock_factor"}));
            overlay(g.config, "prices", rsk_prices_opt, rsk_prices);
            overlay(g.config, "theta", rsk_theta_opt, rsk_theta);
            overlay(g.config, "shock_asset", rsk_asset_opt, rsk_shock_asset);
            overlay(g.config, "shock_factor", rsk_factor_opt, rsk_shock_factor);
            if (rsk_prices.empty()) {
                throw std::invalid_argument("risk needs --prices (or config key prices)");
            }
            return cmd_risk(g, rsk_prices, rsk_theta, rsk_shock_asset, rsk_shock_factor);
        }
        if (app.got_subcommand(sim)) {
            g.config.check_keys(with_global(
                {"trials", "operators", "ssps", "theta", "workers", "reward_mode", "stake_lo",
                 "stake_hi", "rate_lo", "rate_hi", "reward_lo", "reward_hi", "pi_lo", "pi_hi",
                 "concentration", "histogram_edges"}));
            overlay(g.config, "trials", sim_trials_opt, sim_trials);
            overlay(g.config, "operators", sim_operators_opt, sim_operators);
            overlay(g.config, "ssps", sim_ssps_opt, sim_ssps);
            overlay(g.config, "theta", sim_theta_opt, sim_theta);
            overlay(g.config, "workers", sim_workers_opt, sim_workers);
            overlay(g.config, "reward_mode", sim_mode_opt, sim_mode);
            overlay(g.config, "stake_lo", sim_stake_lo_opt, sim_stake_lo);
            overlay(g.config, "stake_hi", sim_stake_hi_opt, sim_stake_hi);
            overlay(g.config, "rate_lo", sim_rate_lo_opt, sim_rate_lo);
            overlay(g.config, "rate_hi", sim_rate_hi_opt, sim_rate_hi);
            overlay(g.config, "reward_lo", sim_reward_lo_opt, sim_reward_lo);
            overlay(g.config, "reward_hi", sim_reward_hi_opt, sim_reward_hi);
            overlay(g.config, "pi_lo", sim_pi_lo_opt, sim_pi_lo);
            overlay(g.config, "pi_hi", sim_pi_hi_opt, sim_pi_hi);
            if (sim_mode != "rate" && sim_mode != "amount") {
                throw std::invalid_argument("reward_mode must be rate or amount");
            }

            sspsec::SimulationConfig cfg;
            cfg.n_trials = static_cast<std::size_t>(count_arg(sim_trials, "--trials"));
            cfg.n_operators = static_cast<std::size_t>(count_arg(sim_operators, "--operators"));
            cfg.n_ssps = static_cast<std::size_t>(count_arg(sim_ssps, "--ssps"));
            cfg.theta = number_arg(sim_theta, "--theta");
            cfg.workers = static_cast<std::size_t>(count_arg(sim_workers, "--workers"));
            cfg.reward_mode =
                sim_mode == "rate" ? sspsec::RewardMode::rate : sspsec::RewardMode::amount;
            cfg.stake_dist = {number_arg(sim_stake_lo, "--stake-lo"),
                              number_arg(sim_stake_hi, "--stake-hi")};
            cfg.rate_dist = {number_arg(sim_rate_lo, "--rate-lo"),
                             number_arg(sim_rate_hi, "--rate-hi")};
            cfg.reward_dist = {number_arg(sim_reward_lo, "--reward-lo"),
                               number_arg(sim_reward_hi, "--reward-hi")};
            cfg.pi_dist = {number_arg(sim_pi_lo, "--pi-lo"), number_arg(sim_pi_hi, "--pi-hi")};
            if (g.config.has("concentration")) {
                cfg.alloc_concentration = stakes_from_json(g.config.raw("concentration"));
            }
            if (g.config.has("histogram_edges")) {
                const json& he = g.config.raw("histogram_edges");
                if (!he.is_object()) {
                    throw std::invalid_argument("histogram_edges must map metric -> edge array");
                }
                cfg.histogram_edges.clear();
                for (auto it = he.begin(); it != he.end(); ++it) {
                    cfg.histogram_edges[it.key()] = stakes_from_json(it.value());
                }
            }
            const auto seed = g.seed();
            if (seed) {
                cfg.seed = *seed;
            }
            cfg.validate();
            return cmd_simulate(g, cfg, seed.has_value());
        }
        throw std::invalid_argument("no command given");
    } catch (const sspsec::internal_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
