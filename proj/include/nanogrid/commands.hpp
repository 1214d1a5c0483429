#pragma once

#include "nanogrid/config.hpp"

#include <exception>
#include <filesystem>
#include <string>
#include <vector>

namespace nanogrid {

/// One output file, fully rendered before anything is written.
struct Artifact {
    std::string name;
    std::string contents;
};
using Artifacts = std::vector<Artifact>;

/// trace.csv and summary.json for one controller (the first configured one
/// when `controller` is empty).
Artifacts cmd_simulate(const RunConfig& config, const std::string& controller = {});
/// comparison.csv, summary.json and trace_<name>.csv per successful row.
Artifacts cmd_compare(const RunConfig& config);
/// tuning.csv and tuning.json for the moving-average window.
Artifacts cmd_tune(const RunConfig& config);
/// forecast_eval.csv (per-lead errors on the scenario day) and the model.
Artifacts cmd_forecast_eval(const RunConfig& config);
/// pv.csv, load.csv and ev.csv of the configured scenario.
Artifacts cmd_synth(const RunConfig& config);

/// Writes every artifact to a temporary name first and renames afterwards,
/// so a failed write leaves no result files behind.
void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts);

/// 2 config/parameter, 3 data, 4 model or infeasibility, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace nanogrid
