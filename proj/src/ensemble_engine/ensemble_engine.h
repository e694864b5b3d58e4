// Orchestrates the full experiment: renewable-share sweep x zones x instants
// x ensemble members, wiring fluctuation sampling -> dispatch -> market, and
// assembling daily observables.
#pragma once

#include "src/balancing_market/balancing_market.h"
#include "src/dispatch/dispatch.h"
#include "src/fluctuations/fluctuations.h"
#include "src/grid_model/grid_model.h"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ensemble_engine {

struct ExperimentFlags {
    bool network_check = false;
    balancing_market::Settlement settlement = balancing_market::Settlement::pay_as_bid;
    bool legacy_update = false;
    // Break the member pairing across instants: daily samples then combine
    // independently resampled configurations instead of reusing the same
    // member label at every instant.
    bool independent_members = false;
};

struct ExperimentConfig {
    std::vector<double> p_percent = {0.24, 0.30, 0.40, 0.50, 0.60};
    fluctuations::FluctuationSpec fluctuations;
    balancing_market::LearningParams learning;
    std::uint64_t master_seed = 0;
    int time_stride = 4; // sample every time_stride-th instant
    int threads = 0;     // 0 = hardware concurrency; BALANCEMKT_THREADS caps
    ExperimentFlags flags;

    void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config_file(const std::string& path);
std::string canonical_config_json(const ExperimentConfig& config);

// One evaluation market session, flattened for reporting.
struct SessionRecord {
    int p_index = 0;
    int zone_index = 0;
    int t = 0;
    int hour = 0;
    long member = 0;
    balancing_market::Direction direction = balancing_market::Direction::up;
    double requirement_mwh = 0.0;
    double cleared_mwh = 0.0;
    double cost_eur = 0.0;
    double marginal_price_eur_mwh = 0.0;
    double shortfall_mwh = 0.0;
};

struct ExperimentResults {
    std::vector<double> p_percent;
    std::vector<std::string> zone_ids;
    int t_count = 0;
    int time_stride = 1;
    double interval_hours = 0.25;
    long members = 0;
    std::uint64_t master_seed = 0;
    std::string config_hash;
    fluctuations::WindModel wind_model = fluctuations::WindModel::gaussian;

    // [p][member] daily aggregates over zones and sampled instants.
    std::vector<std::vector<double>> daily_up_volume_gwh;
    std::vector<std::vector<double>> daily_down_volume_gwh;
    std::vector<std::vector<double>> daily_up_cost_eur;
    std::vector<std::vector<double>> daily_down_cost_eur;

    // [p][technology] mean per-session profit.
    std::vector<std::array<double, grid_model::kTechnologyCount>> tech_profit_eur;

    std::vector<SessionRecord> sessions; // ordered by (p, zone, t, member)
};

// Deterministic in (scenario, config) including the thread count. Throws
// core::InfeasibleError naming (p, t) when a reference dispatch fails.
ExperimentResults run_experiment(const grid_model::GridScenario& scenario, const ExperimentConfig& config);

// Mean per-session profit by technology over a batch of session results.
// Unknown generator ids raise core::ValidationError.
std::map<grid_model::Technology, double> aggregate_profit_by_technology(
    const std::vector<balancing_market::MarketSessionResult>& sessions,
    const std::vector<grid_model::ConventionalGenerator>& catalog);

struct WindComparison {
    ExperimentResults gaussian;
    ExperimentResults weibull;
};

// Two runs differing only in the wind model. Load and PV perturbations share
// their sub-streams, so the pair is coupled draw-for-draw.
WindComparison compare_wind_models(const grid_model::GridScenario& scenario, const ExperimentConfig& config);

} // namespace ensemble_engine
