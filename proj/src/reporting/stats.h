// Summary statistics used by the reports: Tukey boxplots, normalized
// histograms, tail probabilities and Fisher skewness.
#pragma once

#include <vector>

namespace reporting {

struct BoxplotStats {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double whisker_low = 0.0;  // most extreme points within 1.5 * IQR
    double whisker_high = 0.0;
    std::vector<double> outliers;
};

// Quantile by linear interpolation between closest ranks on the sorted
// sample (position (n-1)*q).
double quantile(std::vector<double> values, double q);

BoxplotStats summarize(std::vector<double> values);

struct Histogram {
    std::vector<double> edges;     // strictly increasing
    std::vector<double> frequency; // normalized, sums to 1
    long count = 0;
};

// Bin convention: a value on an edge belongs to the bin on its right; the
// last bin also includes its upper edge. Values must lie within the edges.
Histogram histogram(const std::vector<double>& values, double bin_width);
Histogram histogram_with_edges(const std::vector<double>& values, std::vector<double> edges);

// Freedman-Diaconis bin width, with fallbacks for degenerate samples.
double freedman_diaconis_width(const std::vector<double>& values);

// Fraction of samples strictly above the threshold.
double tail_prob(const std::vector<double>& values, double threshold);

// Fisher moment skewness m3 / m2^(3/2).
double skewness(const std::vector<double>& values);

double mean(const std::vector<double>& values);

} // namespace reporting
