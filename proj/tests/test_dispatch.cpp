#include "src/dispatch/dispatch.h"

#include "src/core/errors.h"
#include "src/dispatch/linear_program.h"
#include "src/grid_model/grid_model.h"
#include "test_oracles.h"

#include <doctest.h>

#include <cmath>

using namespace dispatch;
using oracles::Instance;

TEST_CASE("susceptance matrix: two-bus definition") {
    Instance inst;
    inst.n_bus = 2;
    inst.branches = {{0, 1, 10.0, 1e6}};
    inst.gens = {{0, 0.0, 100.0, 10.0}};
    inst.load = {0.0, 50.0};
    const auto s = oracles::to_scenario(inst);
    const SusceptanceSystem sys = build_susceptance(s);
    CHECK(sys.b_matrix(0, 0) == doctest::Approx(10.0));
    CHECK(sys.b_matrix(1, 1) == doctest::Approx(10.0));
    CHECK(sys.b_matrix(0, 1) == doctest::Approx(-10.0));
    CHECK(sys.b_matrix(1, 0) == doctest::Approx(-10.0));
}

TEST_CASE("susceptance matrix: triangle and star patterns") {
    Instance tri;
    tri.n_bus = 3;
    tri.branches = {{0, 1, 1.0, 1e6}, {1, 2, 1.0, 1e6}, {0, 2, 1.0, 1e6}};
    tri.gens = {{0, 0.0, 100.0, 10.0}};
    tri.load = {0.0, 0.0, 50.0};
    const SusceptanceSystem ts = build_susceptance(oracles::to_scenario(tri));
    for (int i = 0; i < 3; ++i) {
        CHECK(ts.b_matrix(i, i) == doctest::Approx(2.0));
        for (int j = 0; j < 3; ++j) {
            if (i != j) CHECK(ts.b_matrix(i, j) == doctest::Approx(-1.0));
        }
    }

    Instance star;
    star.n_bus = 4;
    star.branches = {{0, 1, 5.0, 1e6}, {0, 2, 5.0, 1e6}, {0, 3, 5.0, 1e6}};
    star.gens = {{0, 0.0, 100.0, 10.0}};
    star.load = {0.0, 0.0, 0.0, 40.0};
    const SusceptanceSystem ss = build_susceptance(oracles::to_scenario(star));
    CHECK(ss.b_matrix(0, 0) == doctest::Approx(15.0)); // center = sum of incident susceptances
}

TEST_CASE("dc power flow: zero injections give zero angles and flows") {
    Instance tri;
    tri.n_bus = 3;
    tri.branches = {{0, 1, 2.0, 1e6}, {1, 2, 3.0, 1e6}, {0, 2, 4.0, 1e6}};
    tri.gens = {{0, 0.0, 100.0, 10.0}};
    tri.load = {0.0, 0.0, 50.0};
    const SusceptanceSystem sys = build_susceptance(oracles::to_scenario(tri));
    const PowerFlowResult pf = solve_dc_power_flow(sys, Eigen::VectorXd::Zero(3));
    CHECK(pf.angles_rad.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(pf.flows_mw.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("dc power flow: single path carries the full transfer") {
    Instance inst;
    inst.n_bus = 2;
    inst.branches = {{0, 1, 10.0, 1e6}};
    inst.gens = {{0, 0.0, 300.0, 10.0}};
    inst.load = {0.0, 100.0};
    const SusceptanceSystem sys = build_susceptance(oracles::to_scenario(inst));
    Eigen::VectorXd inj(2);
    inj << 100.0, -100.0;
    const PowerFlowResult pf = solve_dc_power_flow(sys, inj);
    CHECK(pf.flows_mw(0) == doctest::Approx(100.0));
}

TEST_CASE("dc power flow: equal triangle splits 60/30 across the two paths") {
    // Hand oracle: reduce B with slack at bus 2, solve the 2x2 system for
    // +90/-90 injections; the direct line carries 60, the two-hop path 30.
    Instance tri;
    tri.n_bus = 3;
    tri.branches = {{0, 1, 1.0, 1e6}, {1, 2, 1.0, 1e6}, {0, 2, 1.0, 1e6}};
    tri.gens = {{0, 0.0, 300.0, 10.0}};
    tri.load = {0.0, 0.0, 10.0};
    const SusceptanceSystem sys = build_susceptance(oracles::to_scenario(tri));
    Eigen::VectorXd inj(3);
    inj << 90.0, -90.0, 0.0;
    const PowerFlowResult pf = solve_dc_power_flow(sys, inj);

    Eigen::Matrix2d reduced;
    reduced << 2.0, -1.0, -1.0, 2.0; // rows/cols for buses 0 and 1
    Eigen::Vector2d rhs(0.9, -0.9);
    const Eigen::Vector2d theta = reduced.inverse() * rhs;
    CHECK(pf.flows_mw(0) == doctest::Approx(1.0 * (theta(0) - theta(1)) * 100.0)); // 60
    CHECK(pf.flows_mw(0) == doctest::Approx(60.0));
    CHECK(std::abs(pf.flows_mw(2)) == doctest::Approx(30.0));
    CHECK(std::abs(pf.flows_mw(1)) == doctest::Approx(30.0));
}

TEST_CASE("reference dispatch: single generator serves the load over one line") {
    Instance inst;
    inst.n_bus = 2;
    inst.branches = {{0, 1, 10.0, 150.0}};
    inst.gens = {{0, 0.0, 200.0, 10.0}};
    inst.load = {0.0, 100.0};
    const DispatchResult d = solve_reference_dispatch(oracles::to_scenario(inst), 0);
    CHECK(d.feasible);
    CHECK(d.setpoints_mw[0] == doctest::Approx(100.0));
    CHECK(d.flows_mw(0) == doctest::Approx(100.0));
    CHECK(d.total_cost_eur_per_h == doctest::Approx(1000.0));
}

TEST_CASE("reference dispatch: uncongested case follows the merit order") {
    Instance inst;
    inst.n_bus = 3;
    inst.branches = {{0, 1, 1.0, 1e6}, {1, 2, 1.0, 1e6}, {0, 2, 1.0, 1e6}};
    inst.gens = {{0, 0.0, 80.0, 10.0}, {1, 0.0, 80.0, 20.0}};
    inst.load = {0.0, 0.0, 100.0};
    const DispatchResult d = solve_reference_dispatch(oracles::to_scenario(inst), 0);
    CHECK(d.setpoints_mw[0] == doctest::Approx(80.0));
    CHECK(d.setpoints_mw[1] == doctest::Approx(20.0));
    CHECK(d.total_cost_eur_per_h == doctest::Approx(1200.0));
    CHECK(d.total_cost_eur_per_h == doctest::Approx(oracles::opf_grid_search(inst)));
}

TEST_CASE("reference dispatch: a binding line caps the cheap generator") {
    Instance inst;
    inst.n_bus = 3;
    inst.branches = {{0, 1, 1.0, 1e6}, {1, 2, 1.0, 1e6}, {0, 2, 1.0, 50.0}};
    inst.gens = {{0, 0.0, 80.0, 10.0}, {1, 0.0, 80.0, 20.0}};
    inst.load = {0.0, 0.0, 100.0};
    const DispatchResult d = solve_reference_dispatch(oracles::to_scenario(inst), 0);
    CHECK(d.setpoints_mw[0] == doctest::Approx(50.0));
    CHECK(d.setpoints_mw[1] == doctest::Approx(50.0));
    CHECK(d.total_cost_eur_per_h == doctest::Approx(1500.0));
    CHECK(std::abs(d.flows_mw(2)) <= 50.0 + 1e-6);
    // brute force confirms 1500 is the cheapest network-feasible dispatch
    CHECK(oracles::opf_grid_search(inst) == doctest::Approx(1500.0));
}

TEST_CASE("reference dispatch: infeasible network reports binding constraints") {
    Instance inst;
    inst.n_bus = 2;
    inst.branches = {{0, 1, 10.0, 50.0}};
    inst.gens = {{0, 0.0, 200.0, 10.0}, {1, 0.0, 30.0, 60.0}};
    inst.load = {0.0, 100.0};
    // bus 1 needs 100 but can import at most 50 and produce at most 30
    CHECK_THROWS_AS(solve_reference_dispatch(oracles::to_scenario(inst), 0), core::InfeasibleError);
}

TEST_CASE("reference dispatch: equal costs break ties toward the lower generator id") {
    Instance inst;
    inst.n_bus = 2;
    inst.branches = {{0, 1, 10.0, 1e6}};
    inst.gens = {{0, 0.0, 100.0, 25.0}, {0, 0.0, 100.0, 25.0}};
    inst.load = {0.0, 60.0};
    const DispatchResult d = solve_reference_dispatch(oracles::to_scenario(inst), 0);
    CHECK(d.setpoints_mw[0] == doctest::Approx(60.0));
    CHECK(d.setpoints_mw[1] == doctest::Approx(0.0));
}

TEST_CASE("reference dispatch: random instances match the grid-search oracle") {
    fluctuations::RngStream rng = fluctuations::RngStream(2024).child("opf");
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const bool uncongested = trial % 2 == 0;
        const Instance inst = oracles::random_instance(rng, uncongested);
        double max_cost = 0.0;
        for (const auto& g : inst.gens) max_cost = std::max(max_cost, g.cost);

        const double oracle = oracles::opf_grid_search(inst);
        DispatchResult d;
        bool lp_feasible = true;
        try {
            d = solve_reference_dispatch(oracles::to_scenario(inst), 0);
        } catch (const core::InfeasibleError&) {
            lp_feasible = false;
        }
        REQUIRE(lp_feasible == std::isfinite(oracle));
        if (!lp_feasible) continue;
        ++checked;
        CHECK(std::abs(d.total_cost_eur_per_h - oracle) <= max_cost * 1.0 + 1e-6);
        if (uncongested) {
            const std::vector<double> merit = oracles::merit_order_dispatch(inst);
            for (size_t k = 0; k < merit.size(); ++k)
                CHECK(d.setpoints_mw[k] == doctest::Approx(merit[k]).epsilon(1e-9).scale(1.0));
        }
        // power balance and box constraints
        double total_load = 0.0;
        for (double v : inst.load) total_load += v;
        double total_gen = 0.0;
        for (size_t k = 0; k < d.setpoints_mw.size(); ++k) {
            total_gen += d.setpoints_mw[k];
            CHECK(d.setpoints_mw[k] >= inst.gens[k].g_min - 1e-7);
            CHECK(d.setpoints_mw[k] <= inst.gens[k].g_max + 1e-7);
        }
        CHECK(std::abs(total_gen - total_load) <= 1e-6);
        for (long b = 0; b < d.flows_mw.size(); ++b)
            CHECK(std::abs(d.flows_mw(b)) <= inst.branches[static_cast<size_t>(b)].limit + 1e-6);
    }
    CHECK(checked >= 30); // the instance family is feasible by construction
}

namespace {

grid_model::GridScenario two_zone_fixture() {
    using namespace grid_model;
    GridScenario s;
    s.meta.name = "two-zone";
    s.zones = {{"ZA"}, {"ZB"}};
    s.buses = {{"B0", "ZA", true}, {"B1", "ZB", false}};
    s.branches = {{"B0", "B1", 10.0, 10000.0}};
    s.generators = {{"G0", "B0", Technology::coal, 0.0, 2000.0, 100.0, 40.0}};
    s.res_generators = {{"W0", "B1", ResKind::wind, 500.0, 0.0}};
    s.loads = {{"L0", "B0", 0.0, 1200.0}};
    s.profile.t_count = 1;
    s.profile.load_mw = {{600.0}};
    s.profile.res_mw = {{150.0}};
    s.validate();
    return s;
}

} // namespace

TEST_CASE("imbalance: reference state nets to zero everywhere") {
    const auto s = two_zone_fixture();
    const DispatchResult ref = solve_reference_dispatch(s, 0);
    fluctuations::PerturbedState st;
    st.t = 0;
    st.load_mw = {600.0};
    st.res_mw = {150.0};
    const BalancingRequirement req = compute_imbalance(ref, s, st);
    CHECK(req.per_zone_mw[0] == doctest::Approx(0.0));
    CHECK(req.per_zone_mw[1] == doctest::Approx(0.0));
    CHECK(req.total_mw == doctest::Approx(0.0));
}

TEST_CASE("imbalance: signed zonal bookkeeping") {
    const auto s = two_zone_fixture();
    const DispatchResult ref = solve_reference_dispatch(s, 0);
    fluctuations::PerturbedState st;
    st.t = 0;
    st.load_mw = {650.0}; // +50 load in zone A
    st.res_mw = {230.0};  // +80 wind in zone B
    const BalancingRequirement req = compute_imbalance(ref, s, st);
    CHECK(req.per_zone_mw[0] == doctest::Approx(50.0));
    CHECK(req.per_zone_mw[1] == doctest::Approx(-80.0));
    CHECK(req.total_mw == doctest::Approx(-30.0));
}

TEST_CASE("imbalance: linear in the deviations") {
    const auto s = two_zone_fixture();
    const DispatchResult ref = solve_reference_dispatch(s, 0);
    fluctuations::PerturbedState st;
    st.t = 0;
    st.load_mw = {612.5};
    st.res_mw = {141.0};
    const BalancingRequirement one = compute_imbalance(ref, s, st);
    fluctuations::PerturbedState doubled;
    doubled.t = 0;
    doubled.load_mw = {600.0 + 2.0 * 12.5};
    doubled.res_mw = {150.0 - 2.0 * 9.0};
    const BalancingRequirement two = compute_imbalance(ref, s, doubled);
    for (size_t z = 0; z < 2; ++z)
        CHECK(two.per_zone_mw[z] == doctest::Approx(2.0 * one.per_zone_mw[z]).epsilon(1e-12));
    CHECK(two.total_mw == doctest::Approx(2.0 * one.total_mw).epsilon(1e-12));
}

TEST_CASE("imbalance: mismatched instants are rejected") {
    const auto s = two_zone_fixture();
    const DispatchResult ref = solve_reference_dispatch(s, 0);
    fluctuations::PerturbedState st;
    st.t = 5;
    st.load_mw = {600.0};
    st.res_mw = {150.0};
    CHECK_THROWS_AS(compute_imbalance(ref, s, st), core::ValidationError);
}

TEST_CASE("imbalance: symmetric fluctuations keep the ensemble mean near zero") {
    const auto s = two_zone_fixture();
    const DispatchResult ref = solve_reference_dispatch(s, 0);
    fluctuations::FluctuationSpec spec; // bounds are far from binding here
    const fluctuations::RngStream base = fluctuations::RngStream(55).child("mean0");
    const int n = 20000;
    double sum = 0.0, sum2 = 0.0;
    for (int j = 0; j < n; ++j) {
        const auto st = fluctuations::perturb(s, 0, spec, base.child("member", j));
        const double total = compute_imbalance(ref, s, st).total_mw;
        sum += total;
        sum2 += total * total;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::abs(mean) <= 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("lp: bounds, equalities and free variables come out right") {
    // min x + 2y s.t. x + y = 10, x <= 6, y free
    lp::Problem p;
    p.objective = Eigen::Vector2d(1.0, 2.0);
    p.lower = Eigen::Vector2d(0.0, -std::numeric_limits<double>::infinity());
    p.upper = Eigen::Vector2d(6.0, std::numeric_limits<double>::infinity());
    lp::Constraint c;
    c.coefficients = Eigen::Vector2d(1.0, 1.0);
    c.relation = lp::Relation::eq;
    c.rhs = 10.0;
    c.name = "sum";
    p.constraints.push_back(c);
    const lp::Solution sol = lp::solve(p);
    REQUIRE(sol.status == lp::SolveStatus::optimal);
    CHECK(sol.x(0) == doctest::Approx(6.0));
    CHECK(sol.x(1) == doctest::Approx(4.0));
    CHECK(sol.objective == doctest::Approx(14.0));
}

TEST_CASE("lp: infeasibility is detected and named") {
    lp::Problem p;
    p.objective = Eigen::VectorXd::Ones(1);
    p.lower = Eigen::VectorXd::Zero(1);
    p.upper = Eigen::VectorXd::Constant(1, 5.0);
    lp::Constraint c;
    c.coefficients = Eigen::VectorXd::Ones(1);
    c.relation = lp::Relation::ge;
    c.rhs = 10.0;
    c.name = "demand";
    p.constraints.push_back(c);
    const lp::Solution sol = lp::solve(p);
    REQUIRE(sol.status == lp::SolveStatus::infeasible);
    REQUIRE(sol.infeasible_constraints.size() == 1);
    CHECK(sol.infeasible_constraints[0] == "demand");
}

TEST_CASE("lp: unbounded problems are flagged") {
    lp::Problem p;
    p.objective = Eigen::VectorXd::Constant(1, -1.0);
    p.lower = Eigen::VectorXd::Zero(1);
    p.upper = Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity());
    const lp::Solution sol = lp::solve(p);
    CHECK(sol.status == lp::SolveStatus::unbounded);
}
