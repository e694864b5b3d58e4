#include "src/fluctuations/fluctuations.h"

#include "src/core/errors.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fluctuations {

const char* to_string(WindModel m) {
    return m == WindModel::gaussian ? "gaussian" : "weibull";
}

WindModel wind_model_from_string(const std::string& s) {
    if (s == "gaussian") return WindModel::gaussian;
    if (s == "weibull") return WindModel::weibull;
    throw core::ParseError("unknown wind model '" + s + "'");
}

void FluctuationSpec::validate() const {
    if (sigma_load < 0.0 || sigma_pv < 0.0 || sigma_wind < 0.0)
        throw core::ValidationError("fluctuation sigmas must be non-negative");
    if (!(weibull_shape > 0.0)) throw core::ValidationError("weibull_shape must be positive");
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * M_SQRT1_2);
}

// Acklam's rational approximation refined with one Halley step; accurate to
// ~1e-15 over (0, 1).
double normal_cdf_inverse(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("normal_cdf_inverse needs p in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,  -2.759285104469687e+02,
                               1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01, -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement.
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

double sample_truncated_normal(double mean, double sigma_rel, double lo, double hi, RngStream& rng) {
    if (lo > hi) throw std::invalid_argument("sample_truncated_normal: lo > hi");
    if (mean < lo || mean > hi) throw std::invalid_argument("sample_truncated_normal: mean outside [lo, hi]");
    if (sigma_rel < 0.0) throw std::invalid_argument("sample_truncated_normal: negative sigma");
    const double sigma = sigma_rel * mean;
    if (sigma == 0.0 || lo == hi) return mean;

    const double za = (lo - mean) / sigma;
    const double zb = (hi - mean) / sigma;
    const double window = normal_cdf(zb) - normal_cdf(za);
    if (window >= 0.01) {
        // Rejection from the untruncated normal; the window always contains
        // the mode, so expected trials stay below 100.
        for (;;) {
            const double x = mean + sigma * rng.normal01();
            if (x >= lo && x <= hi) return x;
        }
    }
    // Narrow window: one-shot inverse CDF.
    const double u = rng.uniform01();
    const double p = normal_cdf(za) + u * window;
    const double x = mean + sigma * normal_cdf_inverse(std::clamp(p, 1e-300, 1.0 - 1e-16));
    return std::clamp(x, lo, hi);
}

double sample_weibull(double reference_mw, double a, RngStream& rng) {
    if (reference_mw < 0.0) throw std::invalid_argument("sample_weibull: negative reference");
    if (!(a > 0.0)) throw std::invalid_argument("sample_weibull: shape must be positive");
    if (reference_mw == 0.0) return 0.0;
    // Mean matching: E[X] = lambda * Gamma(1 + 1/a) = reference.
    const double lambda = reference_mw / std::tgamma(1.0 + 1.0 / a);
    const double u = rng.uniform01(); // in [0,1); 1-u in (0,1] keeps the log finite
    return lambda * std::pow(-std::log(1.0 - u), 1.0 / a);
}

double perturbed_load(const grid_model::GridScenario& s, int load_idx, int t, const FluctuationSpec& spec,
                      const RngStream& member_stream) {
    const auto& l = s.loads[static_cast<size_t>(load_idx)];
    const double mean = s.profile.load_mw[static_cast<size_t>(load_idx)][static_cast<size_t>(t)];
    RngStream leaf = member_stream.child("load", static_cast<std::uint64_t>(load_idx));
    return sample_truncated_normal(mean, spec.sigma_load, l.d_min, l.d_max, leaf);
}

double perturbed_res(const grid_model::GridScenario& s, int res_idx, int t, const FluctuationSpec& spec,
                     const RngStream& member_stream) {
    const auto& r = s.res_generators[static_cast<size_t>(res_idx)];
    const double mean = s.profile.res_mw[static_cast<size_t>(res_idx)][static_cast<size_t>(t)];
    if (r.kind == grid_model::ResKind::pv) {
        RngStream leaf = member_stream.child("pv", static_cast<std::uint64_t>(res_idx));
        return sample_truncated_normal(mean, spec.sigma_pv, r.floor, r.capacity, leaf);
    }
    RngStream leaf = member_stream.child("wind", static_cast<std::uint64_t>(res_idx));
    if (spec.wind_model == WindModel::gaussian)
        return sample_truncated_normal(mean, spec.sigma_wind, r.floor, r.capacity, leaf);
    // Weibull support is [0, inf); clip to the physical range instead of
    // resampling so the tail mass lands on the capacity limit.
    const double x = sample_weibull(mean, spec.weibull_shape, leaf);
    return std::clamp(x, r.floor, r.capacity);
}

PerturbedState perturb(const grid_model::GridScenario& s, int t, const FluctuationSpec& spec,
                       const RngStream& member_stream) {
    if (t < 0 || t >= s.profile.t_count) throw std::invalid_argument("perturb: instant out of range");
    spec.validate();
    PerturbedState state;
    state.t = t;
    state.load_mw.resize(s.loads.size());
    state.res_mw.resize(s.res_generators.size());
    for (size_t i = 0; i < s.loads.size(); ++i)
        state.load_mw[i] = perturbed_load(s, static_cast<int>(i), t, spec, member_stream);
    for (size_t i = 0; i < s.res_generators.size(); ++i)
        state.res_mw[i] = perturbed_res(s, static_cast<int>(i), t, spec, member_stream);
    return state;
}

} // namespace fluctuations
