// balmkt: balancing-market simulator command line.
//
// Exit codes: 0 success, 1 validation/parse error, 2 infeasible problem,
// 3 I/O error.
#include "src/core/errors.h"
#include "src/ensemble_engine/ensemble_engine.h"
#include "src/grid_model/grid_model.h"
#include "src/reporting/report.h"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>

namespace {

int run_synth(int buses, int zones, std::uint64_t seed, double res_fraction, int t_count, const std::string& out) {
    grid_model::SynthesisSpec spec;
    spec.n_buses = buses;
    spec.n_zones = zones;
    spec.seed = seed;
    spec.res_fraction_of_capacity = res_fraction;
    spec.t_count = t_count;
    const grid_model::GridScenario scenario = grid_model::synthesize_scenario(spec);
    grid_model::save_scenario_file(scenario, out);
    std::cout << "wrote " << out << " (" << scenario.buses.size() << " buses, " << scenario.generators.size()
              << " generators, " << scenario.res_generators.size() << " RES units)\n";
    return 0;
}

int run_run(const std::string& scenario_path, const std::string& config_path, const std::string& out, int threads) {
    const grid_model::GridScenario scenario = grid_model::load_scenario_file(scenario_path);
    ensemble_engine::ExperimentConfig config = ensemble_engine::load_experiment_config_file(config_path);
    if (threads > 0) config.threads = threads;
    const ensemble_engine::ExperimentResults results = ensemble_engine::run_experiment(scenario, config);
    reporting::render_report(results, out);
    std::cout << "wrote results bundle to " << out << " (" << results.sessions.size() << " sessions)\n";
    return 0;
}

int run_report(const std::string& results_dir, const std::string& out) {
    const ensemble_engine::ExperimentResults results = reporting::load_results(results_dir);
    reporting::render_summary(results, out);
    std::cout << "wrote report to " << out << "\n";
    return 0;
}

int run_compare_wind(const std::string& scenario_path, const std::string& config_path, const std::string& out,
                     int threads) {
    const grid_model::GridScenario scenario = grid_model::load_scenario_file(scenario_path);
    ensemble_engine::ExperimentConfig config = ensemble_engine::load_experiment_config_file(config_path);
    if (threads > 0) config.threads = threads;
    const ensemble_engine::WindComparison cmp = ensemble_engine::compare_wind_models(scenario, config);
    reporting::render_report(cmp.gaussian, std::string(out) + "/gaussian");
    reporting::render_report(cmp.weibull, std::string(out) + "/weibull");
    reporting::write_wind_comparison(cmp, out);
    std::cout << "wrote paired wind-model results to " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"balmkt: Monte-Carlo balancing-market simulator on a DC grid model"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic scenario file");
    int buses = 20, zones = 6, t_count = 96;
    std::uint64_t seed = 1;
    double res_fraction = 0.3;
    std::string synth_out = "scenario.json";
    synth->add_option("--buses", buses, "Number of buses");
    synth->add_option("--zones", zones, "Number of market zones");
    synth->add_option("--seed", seed, "Synthesis seed");
    synth->add_option("--res-fraction", res_fraction, "Peak RES expectation as a fraction of conventional capacity");
    synth->add_option("--t-count", t_count, "Instants per day");
    synth->add_option("--out", synth_out, "Output scenario path")->required();

    auto* run = app.add_subcommand("run", "Run an experiment and write the results bundle");
    std::string run_scenario, run_config, run_out;
    int run_threads = 0;
    run->add_option("--scenario", run_scenario, "Scenario file")->required();
    run->add_option("--config", run_config, "Experiment config file")->required();
    run->add_option("--out", run_out, "Results directory")->required();
    run->add_option("--threads", run_threads, "Worker threads (0 = auto; BALANCEMKT_THREADS caps)");

    auto* report = app.add_subcommand("report", "Summarize a results bundle into tables and SVG plots");
    std::string rep_results, rep_out;
    report->add_option("--results", rep_results, "Results directory from `run`")->required();
    report->add_option("--out", rep_out, "Report directory")->required();

    auto* cmpw = app.add_subcommand("compare-wind", "Paired Gaussian vs Weibull wind runs");
    std::string cw_scenario, cw_config, cw_out;
    int cw_threads = 0;
    cmpw->add_option("--scenario", cw_scenario, "Scenario file")->required();
    cmpw->add_option("--config", cw_config, "Experiment config file")->required();
    cmpw->add_option("--out", cw_out, "Output directory")->required();
    cmpw->add_option("--threads", cw_threads, "Worker threads");

    try {
        app.parse(argc, argv);
        if (synth->parsed()) return run_synth(buses, zones, seed, res_fraction, t_count, synth_out);
        if (run->parsed()) return run_run(run_scenario, run_config, run_out, run_threads);
        if (report->parsed()) return run_report(rep_results, rep_out);
        if (cmpw->parsed()) return run_compare_wind(cw_scenario, cw_config, cw_out, cw_threads);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const core::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const core::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const core::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const core::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
