#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sspsec/csv.hpp"
#include "sspsec/risk.hpp"
#include "sspsec/rng.hpp"

using namespace sspsec;

namespace {

std::string temp_csv(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("sspsec_risk_" + name);
    csv::write_file(path.string(), content);
    return path.string();
}

ReturnMatrix matrix_of(std::vector<std::string> assets,
                       std::vector<std::vector<double>> rows) {
    ReturnMatrix rm;
    rm.assets = std::move(assets);
    rm.returns = std::move(rows);
    for (std::size_t t = 0; t < rm.returns.size(); ++t) {
        rm.dates.push_back("2024-01-0" + std::to_string(t + 1));
    }
    return rm;
}

}  // namespace

TEST_CASE("price ingestion groups and sorts by asset") {
    const auto path = temp_csv("ok.csv",
                               "date,asset,close\n"
                               "2024-01-02,aaa,11\n"
                               "2024-01-01,aaa,10\n"
                               "2024-01-01,bbb,5\n"
                               "\n"
                               "2024-01-02,bbb,6\n");
    const auto series = ingest_prices(path);
    REQUIRE(series.size() == 2);
    CHECK(series[0].asset == "aaa");
    CHECK(series[0].dates == std::vector<std::string>{"2024-01-01", "2024-01-02"});
    CHECK(series[0].prices == std::vector<double>{10.0, 11.0});
    CHECK(series[1].asset == "bbb");
    CHECK(series[1].prices == std::vector<double>{5.0, 6.0});
}

TEST_CASE("price ingestion reports the offending line") {
    auto expect_error = [](const std::string& name, const std::string& body,
                           const std::string& fragment) {
        const auto path = temp_csv(name, body);
        try {
            ingest_prices(path);
            FAIL("expected ingest_prices to throw for " << name);
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
        }
    };
    expect_error("hdr.csv", "time,asset,close\n2024-01-01,aaa,1\n", ":1: expected header");
    expect_error("dup.csv",
                 "date,asset,close\n2024-01-01,aaa,1\n2024-01-01,aaa,2\n", ":3: duplicate");
    expect_error("zero.csv", "date,asset,close\n2024-01-01,aaa,0\n", ":2: nonpositive");
    expect_error("date.csv", "date,asset,close\n01/02/2024,aaa,1\n", ":2: malformed ISO-8601");
    expect_error("fields.csv", "date,asset,close\n2024-01-01,aaa\n", ":2: expected 3 fields");
    expect_error("num.csv", "date,asset,close\n2024-01-01,aaa,ten\n", ":2:");
}

TEST_CASE("log returns") {
    PriceSeries flat{"flat", {"2024-01-01", "2024-01-02", "2024-01-03"}, {7.0, 7.0, 7.0}};
    for (double r : log_returns(flat)) {
        CHECK(r == 0.0);
    }

    const double e = std::exp(1.0);
    PriceSeries expo{"expo", {"2024-01-01", "2024-01-02"}, {1.0, e}};
    const auto r = log_returns(expo);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == Catch::Approx(1.0).epsilon(1e-15));

    PriceSeries stub{"stub", {"2024-01-01"}, {3.0}};
    CHECK_THROWS_AS(log_returns(stub), std::invalid_argument);
}

TEST_CASE("return alignment joins on common dates") {
    PriceSeries a{"aaa",
                  {"2024-01-01", "2024-01-02", "2024-01-03", "2024-01-04"},
                  {1.0, 2.0, 4.0, 8.0}};
    PriceSeries b{"bbb", {"2024-01-01", "2024-01-03", "2024-01-04"}, {1.0, 3.0, 9.0}};
    const auto rm = align_returns({a, b});
    CHECK(rm.assets == std::vector<std::string>{"aaa", "bbb"});
    CHECK(rm.dates == std::vector<std::string>{"2024-01-03", "2024-01-04"});
    REQUIRE(rm.returns.size() == 2);
    CHECK(rm.returns[0][0] == Catch::Approx(std::log(4.0)).epsilon(1e-15));
    CHECK(rm.returns[0][1] == Catch::Approx(std::log(3.0)).epsilon(1e-15));
    CHECK(rm.returns[1][0] == Catch::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(rm.returns[1][1] == Catch::Approx(std::log(3.0)).epsilon(1e-15));

    PriceSeries c{"ccc", {"2024-02-01", "2024-02-02"}, {1.0, 2.0}};
    CHECK_THROWS_AS(align_returns({a, c}), std::invalid_argument);
    CHECK_THROWS_AS(align_returns({}), std::invalid_argument);
}

TEST_CASE("correlation matrix basics") {
    const auto rm = matrix_of({"up", "down", "still"},
                              {{0.01, -0.01, 0.0},
                               {0.03, -0.03, 0.0},
                               {-0.02, 0.02, 0.0},
                               {0.005, -0.005, 0.0}});
    const auto corr = correlation_matrix(rm);
    CHECK(corr.matrix[0][0] == 1.0);
    CHECK(corr.matrix[1][1] == 1.0);
    CHECK(std::abs(corr.matrix[0][1] + 1.0) <= 1e-12);
    CHECK(corr.matrix[0][1] == corr.matrix[1][0]);

    CHECK(corr.zero_variance == std::vector<bool>{false, false, true});
    CHECK(std::isnan(corr.matrix[2][2]));
    CHECK(std::isnan(corr.matrix[0][2]));

    CHECK_THROWS_AS(correlation_matrix(matrix_of({"one"}, {{0.01}})), std::invalid_argument);
}

TEST_CASE("correlation matrices are positive semidefinite") {
    RandomStream rng(0x5151u, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t m = 2 + rng.uniform_index(4);
        const std::size_t t_count = m + 2 + rng.uniform_index(20);
        std::vector<std::vector<double>> rows(t_count, std::vector<double>(m));
        for (auto& row : rows) {
            for (auto& x : row) {
                x = rng.normal() * 0.05;
            }
        }
        std::vector<std::string> names;
        for (std::size_t a = 0; a < m; ++a) {
            names.push_back("a" + std::to_string(a));
        }
        const auto corr = correlation_matrix(matrix_of(names, rows));
        for (double lambda : oracle::eigenvalues_sym(corr.matrix)) {
            CHECK(lambda >= -1e-9);
        }
    }
}

TEST_CASE("covariance estimates recover a planted correlation") {
    const double vol = 0.02;
    for (const double rho : {0.0, 0.5, 0.8}) {
        RandomStream rng(0xc0feeu, static_cast<std::uint64_t>(rho * 10.0));
        const auto l = cholesky({{1.0, rho}, {rho, 1.0}});
        std::vector<std::vector<double>> rows(10000, std::vector<double>(2));
        for (auto& row : rows) {
            const double z0 = rng.normal();
            const double z1 = rng.normal();
            row[0] = vol * (l[0][0] * z0);
            row[1] = vol * (l[1][0] * z0 + l[1][1] * z1);
        }
        const auto rm = matrix_of({"x", "y"}, rows);
        const auto corr = correlation_matrix(rm);
        CHECK(corr.matrix[0][1] == Catch::Approx(rho).margin(0.03));

        const auto cov = estimate_cov(rm);
        CHECK(cov.variances[0] == Catch::Approx(vol * vol).epsilon(0.05));
        CHECK(cov.variances[1] == Catch::Approx(vol * vol).epsilon(0.05));
        CHECK(cov.covariances[0][1] == cov.covariances[1][0]);

        std::vector<double> xs;
        std::vector<double> ys;
        for (const auto& row : rows) {
            xs.push_back(row[0]);
            ys.push_back(row[1]);
        }
        CHECK(corr.matrix[0][1] == Catch::Approx(oracle::pearson(xs, ys)).epsilon(1e-12));
    }
}

TEST_CASE("security variance collapses to the squared pool stake") {
    CHECK(security_variance({2.0, 3.0}, 4.0) == 100.0);
    CHECK(security_variance({5.0}, 0.3) == 5.0 * 5.0 * 0.3);
    CHECK(security_variance({1.0, 2.0, 3.0}, 0.0) == 0.0);
    CHECK_THROWS_AS(security_variance({1.0}, -0.1), std::invalid_argument);

    RandomStream rng(0x5ecu, 0);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 1 + rng.uniform_index(10);
        std::vector<double> col(n);
        double total = 0.0;
        for (auto& w : col) {
            w = rng.uniform(0.0, 50.0);
            total += w;
        }
        const double var_p = rng.uniform(0.0, 2.0);
        CHECK(security_variance(col, var_p) ==
              Catch::Approx(total * total * var_p).epsilon(1e-12));
    }
}

TEST_CASE("portfolio variance is the quadratic form") {
    CovModel cov;
    cov.assets = {"x", "y"};
    cov.variances = {0.04, 0.09};
    cov.covariances = {{0.04, 0.0}, {0.0, 0.09}};
    CHECK(portfolio_variance({2.0, 3.0}, cov) ==
          Catch::Approx(4.0 * 0.04 + 9.0 * 0.09).epsilon(1e-15));
    CHECK(portfolio_variance({0.0, 0.0}, cov) == 0.0);
    CHECK_THROWS_AS(portfolio_variance({1.0}, cov), std::invalid_argument);

    CovModel coupled = cov;
    coupled.covariances[0][1] = coupled.covariances[1][0] = 0.03;
    CHECK(portfolio_variance({2.0, 3.0}, coupled) >
          portfolio_variance({2.0, 3.0}, cov));

    // splitting stake across uncorrelated assets beats concentration
    const double spread = portfolio_variance({0.5, 0.5}, cov);
    CHECK(spread < portfolio_variance({1.0, 0.0}, cov));
    CHECK(spread < portfolio_variance({0.0, 1.0}, cov));
}

TEST_CASE("first-order stochastic dominance on small samples") {
    const double theta = 1.0 / 3.0;
    const auto res = fsd_check({1.0, 2.0, 3.0}, {2.0, 3.0, 4.0}, theta);
    CHECK(res.dominates);
    CHECK(res.bound == 1.0);
    REQUIRE(res.paired_min_mean.has_value());
    CHECK(*res.paired_min_mean == 2.0);
    REQUIRE(res.paired_bound_ok.has_value());
    CHECK(*res.paired_bound_ok);

    CHECK_FALSE(fsd_check({2.0, 3.0, 4.0}, {1.0, 2.0, 3.0}, theta).dominates);

    const auto lone = fsd_check({1.0}, {5.0}, theta);
    CHECK(lone.dominates);
    CHECK(*lone.paired_min_mean == 1.0);
    CHECK(*lone.paired_bound_ok);
    CHECK_FALSE(fsd_check({5.0}, {1.0}, theta).dominates);

    // identical sample multisets dominate in both directions
    CHECK(fsd_check({1.0, 2.0}, {2.0, 1.0}, theta).dominates);
    CHECK(fsd_check({2.0, 1.0}, {1.0, 2.0}, theta).dominates);

    CHECK_THROWS_AS(fsd_check({}, {1.0}, theta), std::invalid_argument);
    CHECK_THROWS_AS(fsd_check({1.0}, {}, theta), std::invalid_argument);
}

TEST_CASE("pointwise-smaller samples always dominate") {
    RandomStream rng(0xf5du, 0);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 1 + rng.uniform_index(40);
        std::vector<double> a(n);
        std::vector<double> b(n);
        for (std::size_t t = 0; t < n; ++t) {
            b[t] = rng.uniform(1.0, 10.0);
            a[t] = b[t] * rng.uniform();
        }
        const auto res = fsd_check(a, b, 1.0 / 3.0);
        CHECK(res.dominates);
        REQUIRE(res.paired_bound_ok.has_value());
        CHECK(*res.paired_bound_ok);
    }
}

TEST_CASE("volatility shock scales one asset and keeps correlations") {
    CovModel cov;
    cov.assets = {"x", "y", "z"};
    cov.variances = {0.04, 0.09, 0.01};
    cov.covariances = {{0.04, 0.012, 0.004}, {0.012, 0.09, 0.006}, {0.004, 0.006, 0.01}};

    const auto same = volatility_shock(cov, "y", 1.0);
    CHECK(same.variances == cov.variances);
    CHECK(same.covariances == cov.covariances);

    const auto shocked = volatility_shock(cov, "y", 2.0);
    CHECK(shocked.variances[1] == 4.0 * cov.variances[1]);
    CHECK(shocked.variances[0] == cov.variances[0]);
    CHECK(shocked.variances[2] == cov.variances[2]);
    CHECK(shocked.covariances[0][1] == 2.0 * cov.covariances[0][1]);
    CHECK(shocked.covariances[1][2] == 2.0 * cov.covariances[1][2]);
    CHECK(shocked.covariances[0][2] == cov.covariances[0][2]);
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) {
            const double before =
                cov.covariances[a][b] / std::sqrt(cov.variances[a] * cov.variances[b]);
            const double after = shocked.covariances[a][b] /
                                 std::sqrt(shocked.variances[a] * shocked.variances[b]);
            CHECK(after == Catch::Approx(before).epsilon(1e-12));
        }
    }

    CHECK_THROWS_AS(volatility_shock(cov, "y", 0.0), std::invalid_argument);
    CHECK_THROWS_AS(volatility_shock(cov, "w", 2.0), std::invalid_argument);
}

TEST_CASE("cholesky factorization") {
    const auto l = cholesky({{4.0, 2.0}, {2.0, 3.0}});
    CHECK(l[0][0] == 2.0);
    CHECK(l[0][1] == 0.0);
    CHECK(l[1][0] == 1.0);
    CHECK(l[1][1] == std::sqrt(2.0));

    CHECK_THROWS_AS(cholesky({{1.0, 2.0}, {2.0, 1.0}}), std::domain_error);
    CHECK_THROWS_AS(cholesky({{1.0, 0.0}, {0.0}}), std::invalid_argument);

    RandomStream rng(0xc4013u, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 1 + rng.uniform_index(6);
        std::vector<std::vector<double>> a(n, std::vector<double>(n));
        for (auto& row : a) {
            for (auto& x : row) {
                x = rng.normal();
            }
        }
        std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < n; ++k) {
                    m[i][j] += a[i][k] * a[j][k];
                }
            }
            m[i][i] += 0.5;
        }
        const auto fac = cholesky(m);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double dot = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    dot += fac[i][k] * fac[j][k];
                }
                CHECK(dot == Catch::Approx(m[i][j]).margin(1e-9));
            }
        }
    }
}

TEST_CASE("matrix formatters") {
    const auto rm = matrix_of({"up", "down"},
                              {{0.01, -0.01}, {0.03, -0.03}, {-0.02, 0.02}});
    const auto corr = correlation_matrix(rm);
    CHECK(format_correlation_csv(corr) ==
          "asset,up,down\n"
          "up,1.0000,-1.0000\n"
          "down,-1.0000,1.0000\n");

    CovModel cov;
    cov.assets = {"x"};
    cov.variances = {0.25};
    cov.covariances = {{0.25}};
    CHECK(format_covariance_csv(cov) == "asset,x\nx,0.25\n");

    const auto degenerate =
        correlation_matrix(matrix_of({"a", "b"}, {{0.01, 0.0}, {0.02, 0.0}}));
    const auto text = format_correlation_csv(degenerate);
    CHECK(text.find("nan") != std::string::npos);
}
