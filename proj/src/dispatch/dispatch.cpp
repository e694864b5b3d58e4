#include "src/dispatch/dispatch.h"

#include "src/core/errors.h"
#include "src/dispatch/linear_program.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dispatch {

SusceptanceSystem build_susceptance(const grid_model::GridScenario& s) {
    const int n = static_cast<int>(s.buses.size());
    SusceptanceSystem sys;
    sys.b_matrix = Eigen::MatrixXd::Zero(n, n);
    sys.base_mva = s.meta.base_mva;
    for (int i = 0; i < n; ++i) {
        if (s.buses[static_cast<size_t>(i)].is_slack) sys.slack_index = i;
    }
    for (const auto& br : s.branches) {
        const int a = s.bus_index.at(br.from_bus);
        const int b = s.bus_index.at(br.to_bus);
        sys.b_matrix(a, a) += br.susceptance;
        sys.b_matrix(b, b) += br.susceptance;
        sys.b_matrix(a, b) -= br.susceptance;
        sys.b_matrix(b, a) -= br.susceptance;
        sys.branches.push_back({a, b, br.susceptance, br.flow_limit});
    }
    // Connectivity shows up as a singular reduced matrix; the scenario
    // validator has already rejected disconnected grids with a clearer
    // message, so only a cheap rank check is kept here.
    if (n > 1) {
        Eigen::MatrixXd reduced(n - 1, n - 1);
        int ri = 0;
        for (int i = 0; i < n; ++i) {
            if (i == sys.slack_index) continue;
            int rj = 0;
            for (int j = 0; j < n; ++j) {
                if (j == sys.slack_index) continue;
                reduced(ri, rj++) = sys.b_matrix(i, j);
            }
            ++ri;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(reduced);
        if (lu.rank() < n - 1) throw core::ValidationError("grid is not connected: susceptance system is singular");
    }
    return sys;
}

PowerFlowResult solve_dc_power_flow(const SusceptanceSystem& sys, const Eigen::VectorXd& injections_mw) {
    const int n = static_cast<int>(sys.b_matrix.rows());
    if (injections_mw.size() != n) throw std::invalid_argument("solve_dc_power_flow: injection size mismatch");

    // Residual goes to the slack bus, then solve the reduced system in
    // per-unit.
    Eigen::VectorXd p = injections_mw / sys.base_mva;
    p(sys.slack_index) -= p.sum();

    PowerFlowResult out;
    out.angles_rad = Eigen::VectorXd::Zero(n);
    if (n > 1) {
        Eigen::MatrixXd reduced(n - 1, n - 1);
        Eigen::VectorXd rhs(n - 1);
        std::vector<int> map;
        map.reserve(static_cast<size_t>(n - 1));
        for (int i = 0; i < n; ++i) {
            if (i != sys.slack_index) map.push_back(i);
        }
        for (int i = 0; i < n - 1; ++i) {
            rhs(i) = p(map[static_cast<size_t>(i)]);
            for (int j = 0; j < n - 1; ++j)
                reduced(i, j) = sys.b_matrix(map[static_cast<size_t>(i)], map[static_cast<size_t>(j)]);
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(reduced);
        const Eigen::VectorXd theta = lu.solve(rhs);
        for (int i = 0; i < n - 1; ++i) out.angles_rad(map[static_cast<size_t>(i)]) = theta(i);
    }
    out.flows_mw.resize(static_cast<long>(sys.branches.size()));
    for (size_t k = 0; k < sys.branches.size(); ++k) {
        const auto& br = sys.branches[k];
        out.flows_mw(static_cast<long>(k)) =
            br.susceptance * (out.angles_rad(br.from) - out.angles_rad(br.to)) * sys.base_mva;
    }
    return out;
}

DispatchResult solve_reference_dispatch(const grid_model::GridScenario& s, int t) {
    if (t < 0 || t >= s.profile.t_count) throw std::invalid_argument("solve_reference_dispatch: instant out of range");
    const SusceptanceSystem sys = build_susceptance(s);
    const int n_bus = static_cast<int>(s.buses.size());
    const int n_gen = static_cast<int>(s.generators.size());
    const double inf = std::numeric_limits<double>::infinity();

    // Variables: [g_0..g_{G-1}, phi_0..phi_{n-1}] with phi = base_mva * theta
    // so branch flow in MW is b * (phi_i - phi_j) and all coefficients live
    // on a similar scale.
    const int nv = n_gen + n_bus;
    lp::Problem prob;
    prob.objective = Eigen::VectorXd::Zero(nv);
    prob.lower = Eigen::VectorXd::Constant(nv, -inf);
    prob.upper = Eigen::VectorXd::Constant(nv, inf);

    double max_cost = 0.0;
    for (int k = 0; k < n_gen; ++k) max_cost = std::max(max_cost, s.generators[static_cast<size_t>(k)].c_prod);
    // Tiny index-ordered cost perturbation resolves equal-cost degeneracy
    // toward the lower generator index.
    const double tie_eps = 1e-7 * std::max(1.0, max_cost) / std::max(1, n_gen);
    for (int k = 0; k < n_gen; ++k) {
        const auto& g = s.generators[static_cast<size_t>(k)];
        prob.objective(k) = g.c_prod + tie_eps * (k + 1);
        prob.lower(k) = g.g_min;
        prob.upper(k) = g.g_max;
    }
    prob.lower(n_gen + sys.slack_index) = 0.0;
    prob.upper(n_gen + sys.slack_index) = 0.0;

    // Net fixed injection per bus: expected RES minus load.
    Eigen::VectorXd fixed = Eigen::VectorXd::Zero(n_bus);
    for (size_t i = 0; i < s.loads.size(); ++i)
        fixed(s.bus_index.at(s.loads[i].bus_id)) -= s.profile.load_mw[i][static_cast<size_t>(t)];
    for (size_t i = 0; i < s.res_generators.size(); ++i)
        fixed(s.bus_index.at(s.res_generators[i].bus_id)) += s.profile.res_mw[i][static_cast<size_t>(t)];

    for (int i = 0; i < n_bus; ++i) {
        lp::Constraint c;
        c.coefficients = Eigen::VectorXd::Zero(nv);
        for (int k = 0; k < n_gen; ++k) {
            if (s.bus_index.at(s.generators[static_cast<size_t>(k)].bus_id) == i) c.coefficients(k) = 1.0;
        }
        for (int j = 0; j < n_bus; ++j) {
            const double bij = sys.b_matrix(i, j);
            if (bij != 0.0) c.coefficients(n_gen + j) = -bij;
        }
        c.relation = lp::Relation::eq;
        c.rhs = -fixed(i);
        c.name = "balance:" + s.buses[static_cast<size_t>(i)].id;
        prob.constraints.push_back(std::move(c));
    }
    for (size_t k = 0; k < sys.branches.size(); ++k) {
        const auto& br = sys.branches[k];
        const std::string tag = s.branches[k].from_bus + "-" + s.branches[k].to_bus;
        lp::Constraint hi;
        hi.coefficients = Eigen::VectorXd::Zero(nv);
        hi.coefficients(n_gen + br.from) = br.susceptance;
        hi.coefficients(n_gen + br.to) = -br.susceptance;
        hi.relation = lp::Relation::le;
        hi.rhs = br.flow_limit_mw;
        hi.name = "flow_hi:" + tag;
        lp::Constraint lo = hi;
        lo.relation = lp::Relation::ge;
        lo.rhs = -br.flow_limit_mw;
        lo.name = "flow_lo:" + tag;
        prob.constraints.push_back(std::move(hi));
        prob.constraints.push_back(std::move(lo));
    }

    const lp::Solution sol = lp::solve(prob);
    if (sol.status == lp::SolveStatus::infeasible) {
        std::string msg = "reference dispatch infeasible at t=" + std::to_string(t);
        if (!sol.infeasible_constraints.empty()) {
            msg += " (binding:";
            for (const auto& name : sol.infeasible_constraints) msg += " " + name;
            msg += ")";
        }
        throw core::InfeasibleError(msg);
    }
    if (sol.status == lp::SolveStatus::unbounded)
        throw std::runtime_error("reference dispatch: unbounded problem (bad bounds)");

    DispatchResult out;
    out.t = t;
    out.feasible = true;
    out.setpoints_mw.resize(static_cast<size_t>(n_gen));
    out.total_cost_eur_per_h = 0.0;
    for (int k = 0; k < n_gen; ++k) {
        out.setpoints_mw[static_cast<size_t>(k)] = sol.x(k);
        out.total_cost_eur_per_h += s.generators[static_cast<size_t>(k)].c_prod * sol.x(k);
    }
    out.angles_rad = sol.x.tail(n_bus) / sys.base_mva;
    out.flows_mw.resize(static_cast<long>(sys.branches.size()));
    for (size_t k = 0; k < sys.branches.size(); ++k) {
        const auto& br = sys.branches[k];
        out.flows_mw(static_cast<long>(k)) =
            br.susceptance * (sol.x(n_gen + br.from) - sol.x(n_gen + br.to));
    }
    return out;
}

BalancingRequirement compute_imbalance(const DispatchResult& reference, const grid_model::GridScenario& s,
                                       const fluctuations::PerturbedState& state) {
    if (reference.t != state.t)
        throw core::ValidationError("compute_imbalance: reference and state instants differ");
    if (state.load_mw.size() != s.loads.size() || state.res_mw.size() != s.res_generators.size())
        throw core::ValidationError("compute_imbalance: state size mismatch");

    BalancingRequirement req;
    req.config_index = state.config_index;
    req.per_zone_mw.assign(s.zones.size(), 0.0);
    const int t = state.t;
    auto zone_of_bus = [&](const std::string& bus_id) {
        return s.zone_index.at(s.buses[static_cast<size_t>(s.bus_index.at(bus_id))].zone_id);
    };
    for (size_t i = 0; i < s.loads.size(); ++i) {
        const double dev = state.load_mw[i] - s.profile.load_mw[i][static_cast<size_t>(t)];
        req.per_zone_mw[static_cast<size_t>(zone_of_bus(s.loads[i].bus_id))] += dev;
    }
    for (size_t i = 0; i < s.res_generators.size(); ++i) {
        const double dev = state.res_mw[i] - s.profile.res_mw[i][static_cast<size_t>(t)];
        req.per_zone_mw[static_cast<size_t>(zone_of_bus(s.res_generators[i].bus_id))] -= dev;
    }
    req.total_mw = 0.0;
    for (double v : req.per_zone_mw) req.total_mw += v;
    return req;
}

} // namespace dispatch
