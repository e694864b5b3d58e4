#include "src/reporting/stats.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reporting {

double mean(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile: empty input");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = static_cast<size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

BoxplotStats summarize(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("summarize: empty input");
    std::sort(values.begin(), values.end());
    auto at = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const size_t lo = static_cast<size_t>(std::floor(pos));
        const size_t hi = static_cast<size_t>(std::ceil(pos));
        const double frac = pos - static_cast<double>(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    BoxplotStats s;
    s.q1 = at(0.25);
    s.median = at(0.5);
    s.q3 = at(0.75);
    const double iqr = s.q3 - s.q1;
    const double fence_low = s.q1 - 1.5 * iqr;
    const double fence_high = s.q3 + 1.5 * iqr;
    s.whisker_low = s.q3; // tightened below
    s.whisker_high = s.q1;
    for (double v : values) {
        if (v < fence_low || v > fence_high) {
            s.outliers.push_back(v);
        } else {
            s.whisker_low = std::min(s.whisker_low, v);
            s.whisker_high = std::max(s.whisker_high, v);
        }
    }
    return s;
}

Histogram histogram_with_edges(const std::vector<double>& values, std::vector<double> edges) {
    if (values.empty()) throw std::invalid_argument("histogram: empty input");
    if (edges.size() < 2) throw std::invalid_argument("histogram: need at least two edges");
    for (size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) throw std::invalid_argument("histogram: edges must be strictly increasing");
    }
    Histogram h;
    h.edges = std::move(edges);
    h.frequency.assign(h.edges.size() - 1, 0.0);
    h.count = static_cast<long>(values.size());
    for (double v : values) {
        if (v < h.edges.front() || v > h.edges.back())
            throw std::invalid_argument("histogram: value outside the binned range");
        size_t idx = static_cast<size_t>(std::upper_bound(h.edges.begin(), h.edges.end(), v) - h.edges.begin());
        if (idx > 0) --idx;                              // edge values go to the right bin
        if (idx >= h.frequency.size()) idx = h.frequency.size() - 1; // top edge closes the last bin
        h.frequency[idx] += 1.0;
    }
    for (double& f : h.frequency) f /= static_cast<double>(h.count);
    return h;
}

Histogram histogram(const std::vector<double>& values, double bin_width) {
    if (values.empty()) throw std::invalid_argument("histogram: empty input");
    if (!(bin_width > 0.0)) throw std::invalid_argument("histogram: bin width must be positive");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    const int bins = std::max(1, static_cast<int>(std::ceil((hi - lo) / bin_width - 1e-12)));
    std::vector<double> edges(static_cast<size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) edges[static_cast<size_t>(i)] = lo + bin_width * i;
    if (edges.back() < hi) edges.back() = hi;
    return histogram_with_edges(values, std::move(edges));
}

double freedman_diaconis_width(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("freedman_diaconis_width: empty input");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double span = sorted.back() - sorted.front();
    if (span <= 0.0) return 1.0;
    const double q1 = quantile(sorted, 0.25);
    const double q3 = quantile(sorted, 0.75);
    const double iqr = q3 - q1;
    const double n_cbrt = std::cbrt(static_cast<double>(values.size()));
    double w = 2.0 * iqr / n_cbrt;
    if (!(w > 0.0)) w = span / std::max(1.0, std::ceil(std::sqrt(static_cast<double>(values.size()))));
    return w;
}

double tail_prob(const std::vector<double>& values, double threshold) {
    if (values.empty()) throw std::invalid_argument("tail_prob: empty input");
    long n = 0;
    for (double v : values) {
        if (v > threshold) ++n;
    }
    return static_cast<double>(n) / static_cast<double>(values.size());
}

double skewness(const std::vector<double>& values) {
    if (values.size() < 3) throw std::invalid_argument("skewness: need at least 3 samples");
    const double m = mean(values);
    double m2 = 0.0, m3 = 0.0;
    for (double v : values) {
        const double d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(values.size());
    m3 /= static_cast<double>(values.size());
    if (!(m2 > 0.0)) throw std::invalid_argument("skewness: degenerate variance");
    return m3 / std::pow(m2, 1.5);
}

} // namespace reporting
