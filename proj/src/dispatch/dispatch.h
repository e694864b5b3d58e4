// DC power flow and DC optimal power flow over a GridScenario, plus the
// zonal balancing requirement of a perturbed state.
#pragma once

#include "src/fluctuations/fluctuations.h"
#include "src/grid_model/grid_model.h"

#include <Eigen/Dense>

#include <vector>

namespace dispatch {

struct SusceptanceSystem {
    Eigen::MatrixXd b_matrix; // nodal susceptance, per-unit
    int slack_index = 0;
    double base_mva = 100.0;
    struct BranchRef {
        int from = 0, to = 0;
        double susceptance = 0.0; // per-unit
        double flow_limit_mw = 0.0;
    };
    std::vector<BranchRef> branches;
};

// B_ii = sum of incident susceptances, B_ij = -b_ij. Throws on a
// disconnected grid.
SusceptanceSystem build_susceptance(const grid_model::GridScenario& scenario);

struct PowerFlowResult {
    Eigen::VectorXd angles_rad; // slack angle 0
    Eigen::VectorXd flows_mw;   // per branch, positive from->to
};

// Solve B*theta = P with the residual injection assigned to the slack bus.
PowerFlowResult solve_dc_power_flow(const SusceptanceSystem& system, const Eigen::VectorXd& injections_mw);

struct DispatchResult {
    int t = 0;
    std::vector<double> setpoints_mw; // aligned with scenario.generators
    Eigen::VectorXd angles_rad;
    Eigen::VectorXd flows_mw;
    double total_cost_eur_per_h = 0.0;
    bool feasible = false;
};

// Cost-minimal dispatch meeting loads net of expected RES at instant t,
// subject to generator boxes and branch flow limits. Equal production costs
// are broken toward the lower generator index. Throws core::InfeasibleError
// naming the binding constraints when no dispatch exists.
DispatchResult solve_reference_dispatch(const grid_model::GridScenario& scenario, int t);

struct BalancingRequirement {
    long config_index = 0;
    std::vector<double> per_zone_mw; // aligned with scenario.zones; positive = deficit
    double total_mw = 0.0;
};

// Nodal mismatch (realized load - reference load) - (realized RES -
// reference RES), aggregated per zone. Positive totals call for
// up-regulation.
BalancingRequirement compute_imbalance(const DispatchResult& reference, const grid_model::GridScenario& scenario,
                                       const fluctuations::PerturbedState& state);

} // namespace dispatch
