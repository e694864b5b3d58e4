#include "src/reporting/report.h"

#include "src/core/errors.h"
#include "src/ensemble_engine/ensemble_engine.h"
#include "src/grid_model/grid_model.h"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

using namespace reporting;
namespace fs = std::filesystem;

namespace {

ensemble_engine::ExperimentResults tiny_results() {
    grid_model::SynthesisSpec spec;
    spec.n_buses = 8;
    spec.n_zones = 2;
    spec.seed = 17;
    const auto scenario = grid_model::synthesize_scenario(spec);
    ensemble_engine::ExperimentConfig cfg;
    cfg.master_seed = 77;
    cfg.p_percent = {0.24, 0.50};
    cfg.time_stride = 24;
    cfg.learning.learning_iterations = 30;
    cfg.learning.evaluation_iterations = 15;
    return ensemble_engine::run_experiment(scenario, cfg);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("balmkt_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("render_report writes the full bundle with deterministic bytes") {
    const auto results = tiny_results();
    const fs::path dir_a = fresh_dir("bundle_a");
    const fs::path dir_b = fresh_dir("bundle_b");
    render_report(results, dir_a);
    render_report(results, dir_b);

    const char* files[] = {"volumes.csv",      "daily_costs.csv",       "sessions.csv",
                           "prices_hourly.csv", "tech_profits.csv",      "summary.csv",
                           "metadata.json",    "volumes_hist.svg",      "volumes_box.svg",
                           "costs_hist.svg",   "prices_hourly_box.svg", "tech_profits.svg"};
    for (const char* f : files) {
        CAPTURE(f);
        REQUIRE(fs::exists(dir_a / f));
        CHECK(slurp(dir_a / f) == slurp(dir_b / f));
    }

    // row counts match sample counts
    const std::string volumes = slurp(dir_a / "volumes.csv");
    const long rows = std::count(volumes.begin(), volumes.end(), '\n') - 1;
    CHECK(rows == static_cast<long>(results.p_percent.size()) * results.members);
}

TEST_CASE("empty results are rejected before any file is written") {
    ensemble_engine::ExperimentResults empty;
    const fs::path dir = fresh_dir("empty");
    CHECK_THROWS_AS(render_report(empty, dir), core::ValidationError);
    CHECK(!fs::exists(dir));
}

TEST_CASE("unwritable output directory raises an io error") {
    const auto results = tiny_results();
    CHECK_THROWS_AS(render_report(results, "/proc/nope/results"), core::IoError);
}

TEST_CASE("a bundle re-parses to the identical sample multisets") {
    const auto results = tiny_results();
    const fs::path dir = fresh_dir("roundtrip");
    render_report(results, dir);
    const auto loaded = load_results(dir);

    CHECK(loaded.p_percent == results.p_percent);
    CHECK(loaded.members == results.members);
    CHECK(loaded.master_seed == results.master_seed);
    CHECK(loaded.config_hash == results.config_hash);
    CHECK(loaded.interval_hours == results.interval_hours);
    for (size_t pi = 0; pi < results.p_percent.size(); ++pi) {
        auto a = results.daily_up_volume_gwh[pi];
        auto b = loaded.daily_up_volume_gwh[pi];
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
        CHECK(loaded.daily_up_cost_eur[pi] == results.daily_up_cost_eur[pi]);
        for (int tech = 0; tech < grid_model::kTechnologyCount; ++tech)
            CHECK(loaded.tech_profit_eur[pi][static_cast<size_t>(tech)] ==
                  results.tech_profit_eur[pi][static_cast<size_t>(tech)]);
    }
    REQUIRE(loaded.sessions.size() == results.sessions.size());
    for (size_t i = 0; i < results.sessions.size(); ++i) {
        CHECK(loaded.sessions[i].requirement_mwh == results.sessions[i].requirement_mwh);
        CHECK(loaded.sessions[i].cost_eur == results.sessions[i].cost_eur);
        CHECK(loaded.sessions[i].member == results.sessions[i].member);
    }

    // and a re-render of the re-parse is byte-identical
    const fs::path dir2 = fresh_dir("roundtrip2");
    render_report(loaded, dir2);
    CHECK(slurp(dir / "volumes.csv") == slurp(dir2 / "volumes.csv"));
    CHECK(slurp(dir / "sessions.csv") == slurp(dir2 / "sessions.csv"));
}

TEST_CASE("render_summary derives the report files from a bundle") {
    const auto results = tiny_results();
    const fs::path dir = fresh_dir("summary_only");
    render_summary(results, dir);
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(fs::exists(dir / "volumes_hist.svg"));
    CHECK(!fs::exists(dir / "volumes.csv")); // summary does not re-export samples
}

TEST_CASE("wind comparison table lists mean, mode and median per model") {
    grid_model::SynthesisSpec spec;
    spec.n_buses = 8;
    spec.n_zones = 2;
    spec.seed = 19;
    const auto scenario = grid_model::synthesize_scenario(spec);
    ensemble_engine::ExperimentConfig cfg;
    cfg.master_seed = 88;
    cfg.p_percent = {0.40};
    cfg.time_stride = 24;
    cfg.learning.learning_iterations = 20;
    cfg.learning.evaluation_iterations = 10;
    const auto cmp = ensemble_engine::compare_wind_models(scenario, cfg);
    const fs::path dir = fresh_dir("windcmp");
    write_wind_comparison(cmp, dir);
    const std::string table = slurp(dir / "comparison.csv");
    CHECK(table.find("gaussian") != std::string::npos);
    CHECK(table.find("weibull") != std::string::npos);
    CHECK(std::count(table.begin(), table.end(), '\n') == 3); // header + 2 rows
}

TEST_CASE("histogram mode picks the densest bin center") {
    std::vector<double> v;
    for (int i = 0; i < 300; ++i) v.push_back(10.0 + 0.01 * (i % 7));
    for (int i = 0; i < 40; ++i) v.push_back(30.0 + 0.01 * (i % 5));
    const double mode = histogram_mode(v);
    CHECK(mode > 8.0);
    CHECK(mode < 12.0);
}
