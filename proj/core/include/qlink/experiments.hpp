#pragma once

// Scenario pipelines behind the CLI: each run is a pure function of
// (config, seed) producing a report and a set of named output files.

#include <cstdint>
#include <map>
#include <string>

#include "qlink/config.hpp"

namespace qlink {

struct RunReport {
    std::string scenario;
    std::string config_hash;
    std::uint64_t seed = 0;
    // filename -> file content; includes "report.json" with the headline
    // metrics and the echoed canonical config.
    std::map<std::string, std::string> files;
};

// Dispatch to the scenario pipeline. Deterministic: identical config (and thus
// seed) yields byte-identical file contents.
RunReport run_experiment(const ExperimentConfig& config);

// Write every file of the report into out_dir (created if needed).
void write_report(const RunReport& report, const std::string& out_dir);

// Extract one plot-ready data file from a finished report. Targets:
// state_fidelities, bloch_mesh, qber_timeseries, skr_curve.
// Throws with a descriptive message when the report lacks the table.
const std::string& emit_plot_data(const RunReport& report, const std::string& target);

}  // namespace qlink
