// Forecast-error sampling: perturbs load, PV and wind expectations into
// ensemble members using truncated normal or Weibull draws.
#pragma once

#include "src/fluctuations/rng_stream.h"
#include "src/grid_model/grid_model.h"

#include <vector>

namespace fluctuations {

enum class WindModel { gaussian, weibull };

const char* to_string(WindModel m);
WindModel wind_model_from_string(const std::string& s);

struct FluctuationSpec {
    double sigma_load = 0.1; // relative std-dev of the load forecast error
    double sigma_pv = 0.08;
    double sigma_wind = 0.1;
    WindModel wind_model = WindModel::gaussian;
    double weibull_shape = 2.0;

    void validate() const;
};

// One ensemble member: realized values at a single instant. Vectors are
// aligned with GridScenario::loads and ::res_generators.
struct PerturbedState {
    int t = 0;
    long config_index = 0;
    std::vector<double> load_mw;
    std::vector<double> res_mw;
};

// Draw from Normal(mean, (sigma_rel*mean)^2) conditioned on [lo, hi].
// sigma_rel = 0 returns the mean exactly. Rejection sampling with an
// inverse-CDF fallback when the acceptance window holds < 1% probability.
double sample_truncated_normal(double mean, double sigma_rel, double lo, double hi, RngStream& rng);

// Weibull draw with shape `a` and scale chosen so the mean equals
// reference_mw (lambda = reference_mw / Gamma(1 + 1/a)). Clipping to the
// generator's [floor, capacity] is the caller's job.
double sample_weibull(double reference_mw, double a, RngStream& rng);

// Standard normal CDF and its inverse (used by the samplers and by tests).
double normal_cdf(double z);
double normal_cdf_inverse(double p);

// Realized value of one element of the grid at instant t. Each element owns
// a labeled sub-stream of `member_stream`, so a subset of elements can be
// sampled in isolation and still matches the corresponding entries of a
// whole-grid perturb() call.
double perturbed_load(const grid_model::GridScenario& s, int load_idx, int t, const FluctuationSpec& spec,
                      const RngStream& member_stream);
double perturbed_res(const grid_model::GridScenario& s, int res_idx, int t, const FluctuationSpec& spec,
                     const RngStream& member_stream);

PerturbedState perturb(const grid_model::GridScenario& s, int t, const FluctuationSpec& spec,
                       const RngStream& member_stream);

} // namespace fluctuations
