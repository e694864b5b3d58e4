#include "src/fluctuations/fluctuations.h"

#include "src/grid_model/grid_model.h"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace fluctuations;

namespace {

// One-sample Kolmogorov-Smirnov statistic against an analytic CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

constexpr double kKs1PercentCoeff = 1.62762; // critical value ~ c / sqrt(n)

double sample_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    return std::sqrt(s2 / static_cast<double>(v.size() - 1));
}

// Small fixture grid: one load, one wind and one PV unit on two buses.
grid_model::GridScenario fixture_scenario() {
    using namespace grid_model;
    GridScenario s;
    s.meta.name = "fixture";
    s.zones = {{"Z0"}};
    s.buses = {{"B0", "Z0", true}, {"B1", "Z0", false}};
    s.branches = {{"B0", "B1", 10.0, 10000.0}};
    s.generators = {{"G0", "B0", Technology::coal, 0.0, 2000.0, 100.0, 40.0}};
    s.res_generators = {{"W0", "B1", ResKind::wind, 400.0, 0.0}, {"PV0", "B1", ResKind::pv, 100.0, 0.0}};
    s.loads = {{"L0", "B1", 250.0, 750.0}};
    s.profile.t_count = 2;
    s.profile.load_mw = {{500.0, 400.0}};
    s.profile.res_mw = {{100.0, 100.0}, {50.0, 0.0}};
    s.validate();
    return s;
}

} // namespace

TEST_CASE("truncated normal: zero sigma returns the mean exactly") {
    RngStream rng(1);
    CHECK(sample_truncated_normal(100.0, 0.0, 0.0, 200.0, rng) == 100.0);
}

TEST_CASE("truncated normal: symmetric window keeps the mean, respects bounds") {
    RngStream rng = RngStream(7).child("tn");
    const int n = 100000;
    std::vector<double> draws;
    draws.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double x = sample_truncated_normal(100.0, 0.1, 0.0, 200.0, rng);
        CHECK(x >= 0.0);
        CHECK(x <= 200.0);
        draws.push_back(x);
    }
    // Symmetric truncation at +-10 sigma: mean stays 100 within 3 standard errors.
    const double se = sample_std(draws) / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(sample_mean(draws) - 100.0) <= 3.0 * se);
}

TEST_CASE("truncated normal: binding lower bound is never crossed") {
    RngStream rng = RngStream(11).child("tn2");
    for (int i = 0; i < 2000; ++i) {
        CHECK(sample_truncated_normal(100.0, 0.1, 100.0, 200.0, rng) >= 100.0);
    }
}

TEST_CASE("truncated normal: KS test against the analytic CDF at the 1% level") {
    const double mean = 100.0, sigma = 10.0, lo = 85.0, hi = 120.0;
    const double fa = normal_cdf((lo - mean) / sigma);
    const double fb = normal_cdf((hi - mean) / sigma);
    auto cdf = [&](double x) { return (normal_cdf((x - mean) / sigma) - fa) / (fb - fa); };

    RngStream rng = RngStream(23).child("ks");
    const int n = 10000;
    std::vector<double> draws;
    draws.reserve(n);
    for (int i = 0; i < n; ++i) draws.push_back(sample_truncated_normal(mean, 0.1, lo, hi, rng));
    CHECK(ks_statistic(draws, cdf) < kKs1PercentCoeff / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("truncated normal: narrow-window inverse-CDF path stays in bounds and distributed") {
    // Window [99, 101] around mean 100 holds ~8% probability at sigma 10; force
    // the fallback with a far narrower window.
    const double mean = 100.0, sigma = 10.0, lo = 99.9, hi = 100.1;
    RngStream rng = RngStream(29).child("narrow");
    const double fa = normal_cdf((lo - mean) / sigma);
    const double fb = normal_cdf((hi - mean) / sigma);
    auto cdf = [&](double x) { return (normal_cdf((x - mean) / sigma) - fa) / (fb - fa); };
    const int n = 10000;
    std::vector<double> draws;
    for (int i = 0; i < n; ++i) {
        const double x = sample_truncated_normal(mean, 0.1, lo, hi, rng);
        CHECK(x >= lo);
        CHECK(x <= hi);
        draws.push_back(x);
    }
    CHECK(ks_statistic(draws, cdf) < kKs1PercentCoeff / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("truncated normal: rejects an inverted window") {
    RngStream rng(3);
    CHECK_THROWS_AS(sample_truncated_normal(100.0, 0.1, 150.0, 50.0, rng), std::invalid_argument);
}

TEST_CASE("weibull: zero reference degenerates to zero") {
    RngStream rng(5);
    CHECK(sample_weibull(0.0, 2.0, rng) == 0.0);
}

TEST_CASE("weibull: mean matching holds within 2%") {
    RngStream rng = RngStream(13).child("wb");
    const int n = 100000;
    std::vector<double> draws;
    draws.reserve(n);
    for (int i = 0; i < n; ++i) draws.push_back(sample_weibull(100.0, 2.0, rng));
    CHECK(sample_mean(draws) == doctest::Approx(100.0).epsilon(0.02));
}

TEST_CASE("weibull: empirical median matches lambda * (ln 2)^(1/a)") {
    // lambda = 2 * 100 / sqrt(pi) = 112.8379...; median = lambda * sqrt(ln 2) = 93.943...
    RngStream rng = RngStream(17).child("wbmed");
    const int n = 100000;
    std::vector<double> draws;
    draws.reserve(n);
    for (int i = 0; i < n; ++i) draws.push_back(sample_weibull(100.0, 2.0, rng));
    std::nth_element(draws.begin(), draws.begin() + n / 2, draws.end());
    const double lambda = 2.0 * 100.0 / std::sqrt(M_PI);
    CHECK(lambda == doctest::Approx(112.8379).epsilon(1e-4));
    CHECK(draws[n / 2] == doctest::Approx(lambda * std::sqrt(std::log(2.0))).epsilon(0.02));
}

TEST_CASE("weibull: KS test against the analytic CDF at the 1% level") {
    const double p_w = 80.0, a = 2.0;
    const double lambda = p_w / std::tgamma(1.0 + 1.0 / a);
    auto cdf = [&](double x) { return 1.0 - std::exp(-std::pow(x / lambda, a)); };
    RngStream rng = RngStream(19).child("wbks");
    const int n = 10000;
    std::vector<double> draws;
    draws.reserve(n);
    for (int i = 0; i < n; ++i) draws.push_back(sample_weibull(p_w, a, rng));
    CHECK(ks_statistic(draws, cdf) < kKs1PercentCoeff / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("streams: identical lineage reproduces, different lineages agree only in law") {
    RngStream a = RngStream(99).child("x", 4).child("y", 2);
    RngStream b = RngStream(99).child("x", 4).child("y", 2);
    RngStream c = RngStream(99).child("x", 4).child("y", 3);
    std::vector<double> da, db, dc;
    for (int i = 0; i < 10000; ++i) {
        da.push_back(sample_truncated_normal(100.0, 0.1, 0.0, 200.0, a));
        db.push_back(sample_truncated_normal(100.0, 0.1, 0.0, 200.0, b));
        dc.push_back(sample_truncated_normal(100.0, 0.1, 0.0, 200.0, c));
    }
    CHECK(da == db);
    CHECK(da != dc);
    auto cdf = [&](double x) { return normal_cdf((x - 100.0) / 10.0); }; // truncation at 10 sigma is immaterial
    CHECK(ks_statistic(da, cdf) < kKs1PercentCoeff / 100.0);
    CHECK(ks_statistic(dc, cdf) < kKs1PercentCoeff / 100.0);
}

TEST_CASE("perturb: zero sigmas reproduce the reference profile") {
    const auto s = fixture_scenario();
    FluctuationSpec spec;
    spec.sigma_load = spec.sigma_pv = spec.sigma_wind = 0.0;
    const PerturbedState st = perturb(s, 0, spec, RngStream(1).child("m", 0));
    CHECK(st.load_mw[0] == 500.0);
    CHECK(st.res_mw[0] == 100.0);
    CHECK(st.res_mw[1] == 50.0);
}

TEST_CASE("perturb: deterministic in the stream lineage") {
    const auto s = fixture_scenario();
    FluctuationSpec spec;
    const PerturbedState a = perturb(s, 1, spec, RngStream(8).child("member", 5));
    const PerturbedState b = perturb(s, 1, spec, RngStream(8).child("member", 5));
    CHECK(a.load_mw == b.load_mw);
    CHECK(a.res_mw == b.res_mw);
}

TEST_CASE("perturb: element values match isolated element sampling") {
    const auto s = fixture_scenario();
    FluctuationSpec spec;
    const RngStream member = RngStream(21).child("member", 3);
    const PerturbedState st = perturb(s, 0, spec, member);
    CHECK(st.load_mw[0] == perturbed_load(s, 0, 0, spec, member));
    CHECK(st.res_mw[0] == perturbed_res(s, 0, 0, spec, member));
    CHECK(st.res_mw[1] == perturbed_res(s, 1, 0, spec, member));
}

TEST_CASE("perturb: per-load spread matches sigma within 5%") {
    const auto s = fixture_scenario();
    FluctuationSpec spec; // sigma_load = 0.1, D = 500 -> sd 50, bounds at 5 sigma
    const int n = 10000;
    std::vector<double> loads;
    loads.reserve(n);
    const RngStream base = RngStream(31).child("ens");
    for (int j = 0; j < n; ++j) loads.push_back(perturb(s, 0, spec, base.child("member", j)).load_mw[0]);
    CHECK(sample_std(loads) == doctest::Approx(50.0).epsilon(0.05));
}

TEST_CASE("perturb: realized values always respect element bounds") {
    const auto s = fixture_scenario();
    FluctuationSpec spec;
    spec.wind_model = WindModel::weibull;
    const RngStream base = RngStream(37).child("bounds");
    for (int j = 0; j < 3000; ++j) {
        const PerturbedState st = perturb(s, 0, spec, base.child("member", j));
        CHECK(st.load_mw[0] >= 250.0);
        CHECK(st.load_mw[0] <= 750.0);
        CHECK(st.res_mw[0] >= 0.0);
        CHECK(st.res_mw[0] <= 400.0); // weibull clipped at capacity
        CHECK(st.res_mw[1] >= 0.0);
        CHECK(st.res_mw[1] <= 100.0);
    }
}

TEST_CASE("perturb: wind model switch leaves load and PV draws untouched") {
    const auto s = fixture_scenario();
    FluctuationSpec gauss;
    FluctuationSpec weib;
    weib.wind_model = WindModel::weibull;
    const RngStream member = RngStream(41).child("member", 12);
    const PerturbedState a = perturb(s, 0, gauss, member);
    const PerturbedState b = perturb(s, 0, weib, member);
    CHECK(a.load_mw[0] == b.load_mw[0]);
    CHECK(a.res_mw[1] == b.res_mw[1]); // PV
    CHECK(a.res_mw[0] != b.res_mw[0]); // wind
}
