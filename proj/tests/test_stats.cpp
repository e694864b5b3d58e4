#include "src/reporting/stats.h"

#include "src/fluctuations/rng_stream.h"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace reporting;

namespace {

// Independent reference implementations, deliberately written differently
// from the library versions.
double ref_quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double idx = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<size_t>(idx);
    if (lo + 1 >= v.size()) return v.back();
    const double w = idx - static_cast<double>(lo);
    return (1.0 - w) * v[lo] + w * v[lo + 1];
}

double ref_skewness(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s2 = 0.0, s3 = 0.0;
    for (double x : v) {
        s2 += std::pow(x - m, 2.0);
        s3 += std::pow(x - m, 3.0);
    }
    s2 /= static_cast<double>(v.size());
    s3 /= static_cast<double>(v.size());
    return s3 / std::pow(std::sqrt(s2), 3.0);
}

std::vector<double> ref_hist_counts(const std::vector<double>& v, const std::vector<double>& edges) {
    std::vector<double> counts(edges.size() - 1, 0.0);
    for (double x : v) {
        for (size_t b = 0; b + 1 < edges.size(); ++b) {
            const bool last = b + 2 == edges.size();
            if (x >= edges[b] && (x < edges[b + 1] || (last && x <= edges[b + 1]))) {
                counts[b] += 1.0;
                break;
            }
        }
    }
    for (double& c : counts) c /= static_cast<double>(v.size());
    return counts;
}

} // namespace

TEST_CASE("summarize: symmetric five-point set") {
    const BoxplotStats s = summarize({1.0, 2.0, 3.0, 4.0, 5.0});
    CHECK(s.median == doctest::Approx(3.0));
    CHECK(s.q1 == doctest::Approx(2.0));
    CHECK(s.q3 == doctest::Approx(4.0));
    CHECK(s.outliers.empty());
    CHECK(s.whisker_low == doctest::Approx(1.0));
    CHECK(s.whisker_high == doctest::Approx(5.0));
}

TEST_CASE("summarize: zero-IQR set flags the stray point") {
    const BoxplotStats s = summarize({1.0, 1.0, 1.0, 1.0, 100.0});
    CHECK(s.q1 == doctest::Approx(1.0));
    CHECK(s.q3 == doctest::Approx(1.0));
    REQUIRE(s.outliers.size() == 1);
    CHECK(s.outliers[0] == doctest::Approx(100.0));
    CHECK(s.whisker_low == doctest::Approx(1.0));
    CHECK(s.whisker_high == doctest::Approx(1.0));
}

TEST_CASE("summarize: constant data gives a zero-width box") {
    const BoxplotStats s = summarize({7.0, 7.0, 7.0, 7.0});
    CHECK(s.median == 7.0);
    CHECK(s.q1 == 7.0);
    CHECK(s.q3 == 7.0);
    CHECK(s.outliers.empty());
}

TEST_CASE("summarize: rejects empty input") {
    CHECK_THROWS_AS(summarize({}), std::invalid_argument);
}

TEST_CASE("histogram: explicit edges and the right-bin convention") {
    const Histogram h = histogram_with_edges({0.5, 1.5}, {0.0, 1.0, 2.0});
    REQUIRE(h.frequency.size() == 2);
    CHECK(h.frequency[0] == doctest::Approx(0.5));
    CHECK(h.frequency[1] == doctest::Approx(0.5));

    const Histogram edge = histogram_with_edges({1.0, 2.0}, {0.0, 1.0, 2.0});
    CHECK(edge.frequency[0] == doctest::Approx(0.0));
    CHECK(edge.frequency[1] == doctest::Approx(1.0)); // 1.0 goes right, 2.0 closes the last bin
}

TEST_CASE("histogram: single-bin degenerate case") {
    const Histogram h = histogram({3.0, 3.0, 3.0}, 1.0);
    CHECK(h.frequency.size() == 1);
    CHECK(h.frequency[0] == doctest::Approx(1.0));
}

TEST_CASE("histogram: frequencies of a large sample sum to one within 1e-12") {
    fluctuations::RngStream rng = fluctuations::RngStream(3).child("hist");
    std::vector<double> v;
    for (int i = 0; i < 10000; ++i) v.push_back(rng.normal01());
    const Histogram h = histogram(v, freedman_diaconis_width(v));
    double total = 0.0;
    for (double f : h.frequency) total += f;
    CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("tail_prob: strict threshold convention") {
    CHECK(tail_prob({1.0, 2.0, 3.0, 4.0}, 0.0) == doctest::Approx(1.0));
    CHECK(tail_prob({1.0, 2.0, 3.0, 4.0}, 4.0) == doctest::Approx(0.0)); // strict
    CHECK(tail_prob({1.0, 2.0, 3.0, 4.0}, 2.5) == doctest::Approx(0.5));
    CHECK(tail_prob({1.0, 2.0, 3.0, 4.0}, 5.0) == doctest::Approx(0.0));
}

TEST_CASE("skewness: symmetric, right-tailed and analytic exponential cases") {
    CHECK(skewness({-1.0, 0.0, 1.0}) == doctest::Approx(0.0));
    CHECK(skewness({0.0, 0.0, 0.0, 10.0}) > 0.0);
    CHECK_THROWS_AS(skewness({5.0, 5.0, 5.0}), std::invalid_argument);

    // exponential(1) has skewness 2
    fluctuations::RngStream rng = fluctuations::RngStream(5).child("exp");
    std::vector<double> v;
    for (int i = 0; i < 100000; ++i) v.push_back(-std::log(1.0 - rng.uniform01()));
    CHECK(skewness(v) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("cross-check against independent reference implementations on random vectors") {
    fluctuations::RngStream rng = fluctuations::RngStream(7).child("ref");
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + static_cast<int>(rng.next_u64() % 200);
        std::vector<double> v;
        for (int i = 0; i < n; ++i) v.push_back(200.0 * rng.uniform01() - 50.0 + 5.0 * rng.normal01());

        const BoxplotStats s = summarize(v);
        CHECK(s.median == doctest::Approx(ref_quantile(v, 0.5)).epsilon(1e-12));
        CHECK(s.q1 == doctest::Approx(ref_quantile(v, 0.25)).epsilon(1e-12));
        CHECK(s.q3 == doctest::Approx(ref_quantile(v, 0.75)).epsilon(1e-12));

        CHECK(skewness(v) == doctest::Approx(ref_skewness(v)).epsilon(1e-9));

        const Histogram h = histogram(v, freedman_diaconis_width(v));
        const std::vector<double> ref = ref_hist_counts(v, h.edges);
        REQUIRE(ref.size() == h.frequency.size());
        for (size_t b = 0; b < ref.size(); ++b) CHECK(h.frequency[b] == doctest::Approx(ref[b]).epsilon(1e-12));
    }
}
