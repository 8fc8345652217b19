#pragma once

// Price-driven risk analysis: log returns, correlation and covariance of
// staked assets, variance of dollar-denominated SSP security, empirical
// first-order stochastic dominance, and volatility-shock scenarios.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sspsec/csv.hpp"
#include "sspsec/model.hpp"

namespace sspsec {

struct PriceSeries {
    std::string asset;
    std::vector<std::string> dates;  // ISO-8601, strictly increasing
    std::vector<double> prices;      // USD per token, > 0
};

struct ReturnMatrix {
    std::vector<std::string> assets;
    std::vector<std::string> dates;            // dates of the return rows
    std::vector<std::vector<double>> returns;  // T x m, row = date, col = asset
};

struct CovModel {
    std::vector<std::string> assets;
    std::vector<double> variances;
    std::vector<std::vector<double>> covariances;  // m x m symmetric

    std::size_t index_of(const std::string& asset) const {
        for (std::size_t i = 0; i < assets.size(); ++i) {
            if (assets[i] == asset) {
                return i;
            }
        }
        throw std::invalid_argument("unknown asset: " + asset);
    }
};

namespace detail {

inline bool iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        return false;
    }
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (s[i] < '0' || s[i] > '9') {
            return false;
        }
    }
    return true;
}

}  // namespace detail

// Reads `date,asset,close` rows into one sorted series per asset. Errors
// carry the offending line number.
inline std::vector<PriceSeries> ingest_prices(const std::string& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) {
        throw std::invalid_argument(path + ": empty file");
    }
    if (csv::split(lines[0]) != std::vector<std::string>{"date", "asset", "close"}) {
        throw std::invalid_argument(path + ":1: expected header `date,asset,close`");
    }
    std::map<std::string, std::map<std::string, double>> by_asset;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (csv::trim(lines[ln]).empty()) {
            continue;
        }
        const std::string where = path + ":" + std::to_string(ln + 1);
        const auto fields = csv::split(lines[ln]);
        if (fields.size() != 3) {
            throw std::invalid_argument(where + ": expected 3 fields, got " +
                                        std::to_string(fields.size()));
        }
        if (!detail::iso_date(fields[0])) {
            throw std::invalid_argument(where + ": malformed ISO-8601 date '" + fields[0] + "'");
        }
        if (fields[1].empty()) {
            throw std::invalid_argument(where + ": empty asset id");
        }
        const double close = csv::parse_double(fields[2], where);
        if (!(close > 0.0)) {
            throw std::invalid_argument(where + ": nonpositive price");
        }
        auto& series = by_asset[fields[1]];
        if (!series.emplace(fields[0], close).second) {
            throw std::invalid_argument(where + ": duplicate (date, asset) row for " +
                                        fields[1] + " on " + fields[0]);
        }
    }
    std::vector<PriceSeries> out;
    for (const auto& [asset, rows] : by_asset) {
        PriceSeries s;
        s.asset = asset;
        for (const auto& [date, close] : rows) {
            s.dates.push_back(date);
            s.prices.push_back(close);
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline std::vector<double> log_returns(const PriceSeries& series) {
    if (series.prices.size() < 2) {
        throw std::invalid_argument("log_returns: series '" + series.asset +
                                    "' needs at least 2 prices");
    }
    std::vector<double> r(series.prices.size() - 1);
    for (std::size_t t = 1; t < series.prices.size(); ++t) {
        r[t - 1] = std::log(series.prices[t] / series.prices[t - 1]);
    }
    return r;
}

// Inner join on dates: only days quoted for every asset enter the matrix;
// returns are taken between consecutive common dates.
inline ReturnMatrix align_returns(const std::vector<PriceSeries>& series) {
    if (series.empty()) {
        throw std::invalid_argument("align_returns: no series");
    }
    std::set<std::string> common(series[0].dates.begin(), series[0].dates.end());
    for (std::size_t a = 1; a < series.size(); ++a) {
        std::set<std::string> mine(series[a].dates.begin(), series[a].dates.end());
        std::set<std::string> kept;
        std::set_intersection(common.begin(), common.end(), mine.begin(), mine.end(),
                              std::inserter(kept, kept.begin()));
        common.swap(kept);
    }
    if (common.size() < 2) {
        throw std::invalid_argument("align_returns: fewer than 2 common dates");
    }
    const std::vector<std::string> dates(common.begin(), common.end());

    ReturnMatrix rm;
    rm.dates.assign(dates.begin() + 1, dates.end());
    rm.returns.assign(dates.size() - 1, std::vector<double>(series.size()));
    for (std::size_t a = 0; a < series.size(); ++a) {
        rm.assets.push_back(series[a].asset);
        std::map<std::string, double> quote;
        for (std::size_t t = 0; t < series[a].dates.size(); ++t) {
            quote[series[a].dates[t]] = series[a].prices[t];
        }
        for (std::size_t t = 1; t < dates.size(); ++t) {
            rm.returns[t - 1][a] = std::log(quote[dates[t]] / quote[dates[t - 1]]);
        }
    }
    return rm;
}

struct CorrelationResult {
    std::vector<std::string> assets;
    std::vector<std::vector<double>> matrix;  // NaN where undefined
    std::vector<bool> zero_variance;          // flagged degenerate assets
};

namespace detail {

inline double column_mean(const std::vector<std::vector<double>>& rows, std::size_t c) {
    double sum = 0.0;
    for (const auto& row : rows) {
        sum += row[c];
    }
    return sum / static_cast<double>(rows.size());
}

}  // namespace detail

inline CorrelationResult correlation_matrix(const ReturnMatrix& rm) {
    const std::size_t t_count = rm.returns.size();
    const std::size_t m = rm.assets.size();
    if (t_count < 2) {
        throw std::invalid_argument("correlation_matrix: need at least 2 aligned samples");
    }
    std::vector<double> mean(m);
    for (std::size_t a = 0; a < m; ++a) {
        mean[a] = detail::column_mean(rm.returns, a);
    }
    std::vector<std::vector<double>> centered_dot(m, std::vector<double>(m, 0.0));
    for (const auto& row : rm.returns) {
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a; b < m; ++b) {
                centered_dot[a][b] += (row[a] - mean[a]) * (row[b] - mean[b]);
            }
        }
    }
    CorrelationResult result;
    result.assets = rm.assets;
    result.zero_variance.resize(m);
    for (std::size_t a = 0; a < m; ++a) {
        result.zero_variance[a] = centered_dot[a][a] == 0.0;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    result.matrix.assign(m, std::vector<double>(m, nan));
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            if (result.zero_variance[a] || result.zero_variance[b]) {
                continue;
            }
            const double rho = (a == b) ? 1.0
                                        : centered_dot[a][b] / std::sqrt(centered_dot[a][a] *
                                                                         centered_dot[b][b]);
            result.matrix[a][b] = rho;
            result.matrix[b][a] = rho;
        }
    }
    return result;
}

// Sample covariance (denominator T-1) of aligned log returns.
inline CovModel estimate_cov(const ReturnMatrix& rm) {
    const std::size_t t_count = rm.returns.size();
    const std::size_t m = rm.assets.size();
    if (t_count < 2) {
        throw std::invalid_argument("estimate_cov: need at least 2 aligned samples");
    }
    std::vector<double> mean(m);
    for (std::size_t a = 0; a < m; ++a) {
        mean[a] = detail::column_mean(rm.returns, a);
    }
    CovModel cov;
    cov.assets = rm.assets;
    cov.covariances.assign(m, std::vector<double>(m, 0.0));
    for (const auto& row : rm.returns) {
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a; b < m; ++b) {
                cov.covariances[a][b] += (row[a] - mean[a]) * (row[b] - mean[b]);
            }
        }
    }
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            cov.covariances[a][b] /= static_cast<double>(t_count - 1);
            cov.covariances[b][a] = cov.covariances[a][b];
        }
        cov.variances.push_back(cov.covariances[a][a]);
    }
    return cov;
}

// Var of a pool's dollar security when every member stake rides one asset:
// the pairwise double-sum expansion, which collapses to (sum omega)^2 Var[p].
inline double security_variance(const std::vector<double>& omega_col, double var_p) {
    if (var_p < 0.0) {
        throw std::invalid_argument("security_variance: negative price variance");
    }
    double diagonal = 0.0;
    for (double w : omega_col) {
        diagonal += w * w * var_p;
    }
    double cross = 0.0;
    for (std::size_t v = 0; v < omega_col.size(); ++v) {
        for (std::size_t u = 0; u < omega_col.size(); ++u) {
            if (u != v) {
                cross += omega_col[v] * omega_col[u] * var_p;
            }
        }
    }
    return diagonal + cross;
}

// w^T Sigma w: variance of one validator's USD stake across SSP assets.
inline double portfolio_variance(const std::vector<double>& weights, const CovModel& cov) {
    if (weights.size() != cov.covariances.size()) {
        throw std::invalid_argument("portfolio_variance: expected " +
                                    std::to_string(cov.covariances.size()) + " weights, got " +
                                    std::to_string(weights.size()));
    }
    double var = 0.0;
    for (std::size_t a = 0; a < weights.size(); ++a) {
        for (std::size_t b = 0; b < weights.size(); ++b) {
            var += weights[a] * cov.covariances[a][b] * weights[b];
        }
    }
    return var;
}

struct FsdResult {
    bool dominates = false;  // CDF(a) >= CDF(b) pointwise: b first-order dominates a
    double bound = 0.0;      // theta * mean(b), the cap on expected minimum attack cost
    std::optional<double> paired_min_mean;  // mean of index-paired minima when sizes match
    std::optional<bool> paired_bound_ok;    // theta * paired_min_mean <= bound
};

// Empirical first-order stochastic dominance on the merged support, plus
// the expected-minimum cap check when samples come index-paired.
inline FsdResult fsd_check(const std::vector<double>& samples_a,
                           const std::vector<double>& samples_b, double theta) {
    if (samples_a.empty() || samples_b.empty()) {
        throw std::invalid_argument("fsd_check: empty sample set");
    }
    std::vector<double> a = samples_a;
    std::vector<double> b = samples_b;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<double> support = a;
    support.insert(support.end(), b.begin(), b.end());
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    auto ecdf = [](const std::vector<double>& sorted, double x) {
        const auto at = std::upper_bound(sorted.begin(), sorted.end(), x);
        return static_cast<double>(at - sorted.begin()) / static_cast<double>(sorted.size());
    };
    FsdResult result;
    result.dominates = true;
    for (double x : support) {
        if (ecdf(a, x) < ecdf(b, x)) {
            result.dominates = false;
            break;
        }
    }
    double mean_b = 0.0;
    for (double x : samples_b) {
        mean_b += x;
    }
    mean_b /= static_cast<double>(samples_b.size());
    result.bound = theta * mean_b;

    if (result.dominates && samples_a.size() == samples_b.size()) {
        double mean_min = 0.0;
        for (std::size_t t = 0; t < samples_a.size(); ++t) {
            mean_min += std::min(samples_a[t], samples_b[t]);
        }
        mean_min /= static_cast<double>(samples_a.size());
        result.paired_min_mean = mean_min;
        result.paired_bound_ok = theta * mean_min <= result.bound;
    }
    return result;
}

// Scales one asset's volatility: its variance by factor^2, its covariances
// by factor; correlations are untouched.
inline CovModel volatility_shock(const CovModel& cov, const std::string& asset, double factor) {
    if (!(factor > 0.0)) {
        throw std::invalid_argument("volatility_shock: factor must be positive");
    }
    const std::size_t idx = cov.index_of(asset);
    CovModel shocked = cov;
    for (std::size_t b = 0; b < shocked.covariances.size(); ++b) {
        if (b != idx) {
            shocked.covariances[idx][b] *= factor;
            shocked.covariances[b][idx] *= factor;
        }
    }
    shocked.covariances[idx][idx] *= factor * factor;
    shocked.variances[idx] *= factor * factor;
    return shocked;
}

// Lower-triangular Cholesky factor; rejects matrices that are not positive
// definite (used to sample correlated returns in tests and shock studies).
inline std::vector<std::vector<double>> cholesky(const std::vector<std::vector<double>>& m) {
    const std::size_t n = m.size();
    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        if (m[i].size() != n) {
            throw std::invalid_argument("cholesky: matrix not square");
        }
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = m[i][j];
            for (std::size_t k = 0; k < j; ++k) {
                sum -= l[i][k] * l[j][k];
            }
            if (i == j) {
                if (sum <= 0.0) {
                    throw std::domain_error("cholesky: matrix not positive definite");
                }
                l[i][i] = std::sqrt(sum);
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    return l;
}

// Table-style presentation: header row of asset ids, 4-decimal entries,
// `nan` where a degenerate asset makes the correlation undefined.
inline std::string format_correlation_csv(const CorrelationResult& corr) {
    std::string out = "asset";
    for (const auto& a : corr.assets) {
        out += "," + a;
    }
    out += "\n";
    for (std::size_t i = 0; i < corr.assets.size(); ++i) {
        out += corr.assets[i];
        for (std::size_t j = 0; j < corr.assets.size(); ++j) {
            const double v = corr.matrix[i][j];
            out += ",";
            out += std::isnan(v) ? "nan" : csv::fmt4(v);
        }
        out += "\n";
    }
    return out;
}

inline std::string format_covariance_csv(const CovModel& cov) {
    std::string out = "asset";
    for (const auto& a : cov.assets) {
        out += "," + a;
    }
    out += "\n";
    for (std::size_t i = 0; i < cov.assets.size(); ++i) {
        out += cov.assets[i];
        for (std::size_t j = 0; j < cov.assets.size(); ++j) {
            out += ",";
            out += csv::fmt(cov.covariances[i][j]);
        }
        out += "\n";
    }
    return out;
}

}  // namespace sspsec
