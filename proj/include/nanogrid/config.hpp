#pragma once

#include "nanogrid/control.hpp"
#include "nanogrid/forecast.hpp"
#include "nanogrid/scenario.hpp"
#include "nanogrid/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nanogrid {

struct FileInputs {
    std::filesystem::path pv_csv;
    std::filesystem::path load_csv;
    std::optional<std::filesystem::path> ev_csv;
    std::string timestamp_column = "timestamp";
    std::string value_column = "kw";
};

struct RampRule {
    std::optional<double> kw_per_step;
    std::optional<double> percent_of_max_load;
    /// Needed by the percent rule; the synthetic section supplies it otherwise.
    std::optional<double> max_load_kw;
};

struct ControllerSpec {
    std::string name;
    ControlMode mode = ControlMode::realtime;
    AllocationOrder allocation_order = AllocationOrder::battery_first;
    int n = 5;
    /// Defaults to the forecaster horizon.
    std::optional<int> h;
};

struct HistorySource {
    /// Either synthetic days drawn like the scenario...
    int synthetic_days = 10;
    std::optional<std::uint64_t> synthetic_seed;  // default: run seed + 1000
    /// ...or recorded series.
    std::optional<std::filesystem::path> pv_csv;
    std::optional<std::filesystem::path> load_csv;
};

struct ForecasterSpec {
    TrainingConfig training;
    HistorySource history;
    /// Load a saved model instead of training one.
    std::optional<std::filesystem::path> model_file;
};

struct TuneSpec {
    std::optional<std::string> base;
    std::vector<int> candidates;  // empty: 0, 5, 10, ... up to h
};

/// Everything one CLI invocation needs. Relative paths are resolved against
/// the directory of the config file.
struct RunConfig {
    std::uint64_t seed = 1;
    std::optional<SyntheticDayOptions> synth;
    std::optional<FileInputs> files;
    BatterySpec battery;
    double battery_soc_init_pct = 50.0;
    double ev_soc_target_pct = 90.0;
    /// Explicit sessions; otherwise the EV CSV, otherwise the bundled four
    /// (synthetic scenarios only).
    std::optional<std::vector<EvSession>> ev_sessions;
    RampRule ramp;
    std::vector<ControllerSpec> controllers;
    std::optional<ForecasterSpec> forecaster;
    TuneSpec tune;
    std::filesystem::path out_dir = "out";

    /// Built-in defaults: the bundled synthetic day with the three paper
    /// controllers and a trained forecaster.
    static RunConfig defaults();
};

/// Parses a JSON config. Unknown keys and mistyped values raise ConfigError
/// naming the field.
RunConfig parse_run_config(const std::string& text, const std::string& source = "config",
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

double effective_ramp_limit(const RunConfig& config);
Scenario build_scenario(const RunConfig& config);
/// Trains or loads the forecaster; nullptr when the config has none.
std::shared_ptr<const ForecastModel> build_forecaster(const RunConfig& config);
/// Resolves controller specs against the forecaster and validates them.
std::vector<ControllerConfig> build_controllers(const RunConfig& config,
                                                const std::shared_ptr<const ForecastModel>& forecaster);

}  // namespace nanogrid
