// Machine-readable result exports (CSV + metadata), SVG plot rendering and
// re-parsing of a results bundle.
#pragma once

#include "src/ensemble_engine/ensemble_engine.h"
#include "src/reporting/stats.h"

#include <filesystem>

namespace reporting {

// Write the full results bundle: CSV tables (volumes, daily costs, session
// log, hourly prices, technology profits), a boxplot summary table, SVG
// panels and metadata.json. Output bytes are deterministic for
// deterministic results (no timestamps). Throws before creating anything
// when the results are empty.
void render_report(const ensemble_engine::ExperimentResults& results, const std::filesystem::path& out_dir);

// Summary table + SVG panels only (what the `report` command derives from a
// previously written bundle).
void render_summary(const ensemble_engine::ExperimentResults& results, const std::filesystem::path& out_dir);

// Re-parse a bundle written by render_report.
ensemble_engine::ExperimentResults load_results(const std::filesystem::path& results_dir);

// Paired wind-model comparison: daily up-volume mean, histogram mode and
// median per share level and model.
void write_wind_comparison(const ensemble_engine::WindComparison& cmp, const std::filesystem::path& out_dir);

// Center of the modal Freedman-Diaconis bin.
double histogram_mode(const std::vector<double>& values);

} // namespace reporting
