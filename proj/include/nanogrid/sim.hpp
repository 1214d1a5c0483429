#pragma once

#include "nanogrid/control.hpp"
#include "nanogrid/metrics.hpp"
#include "nanogrid/result.hpp"
#include "nanogrid/scenario.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nanogrid {

struct ComparisonRow {
    std::string name;
    std::string mode;
    std::optional<ScenarioResult> result;
    /// Set when the run failed; other rows are unaffected.
    std::string error;
};

struct ComparisonReport {
    double ramp_limit_kw_per_step = 0.0;
    /// Uncontrolled baseline first, then controllers ordered by name.
    std::vector<ComparisonRow> rows;

    const ComparisonRow* find(const std::string& name) const;
};

/// Runs every controller on its own copy of the scenario plus the
/// uncontrolled baseline.
ComparisonReport compare(const Scenario& scenario, std::span<const ControllerConfig> controllers,
                         bool concurrent = true);

// ---------------------------------------------------------------------------
// Bundled synthetic scenario

struct SyntheticDayOptions {
    double pv_peak_kw = 80.0;
    double max_load_kw = 40.0;
    double base_load_kw = 12.0;
    double load_noise_kw = 0.3;
    double ramp_percent_of_max_load = 1.0;
    CloudRegime clouds{};
    PvDayOptions pv{};
    BatterySpec battery{};
    BatteryState battery_initial{50.0};
    double ev_soc_target_pct = 90.0;
    int horizon_minutes = 15;
};

/// Four charging sessions over the working day on 24 kWh / 6.6 kW stations.
std::vector<EvSession> default_ev_sessions(double soc_target_pct = 90.0);

/// One cloudy day with the case-study sizing: 80 kW PV, 40 kW peak load,
/// 40 kWh / 10 kW battery, four EV sessions; ramp limit 1% of max load per minute.
Scenario bundled_scenario(std::uint64_t seed, const SyntheticDayOptions& options = {});

/// `days` consecutive synthetic days (PV, load) drawn from the same regime as
/// bundled_scenario, for forecaster training and window tuning.
struct SyntheticHistory {
    PowerSeries pv;
    PowerSeries load;
};
SyntheticHistory synthetic_history(std::uint64_t seed, int days, const SyntheticDayOptions& options = {});

/// Random sessions that are feasible by construction.
std::vector<EvSession> random_ev_sessions(std::uint64_t seed, int count, int day_minutes = kMinutesPerDay,
                                          double soc_target_pct = 90.0);

// ---------------------------------------------------------------------------
// Output formats

/// `step,raw_net_kw,target_kw,achieved_kw,batt_soc_pct,violation_kw[,ev_<i>_soc_pct...]`
std::string trace_csv(const ScenarioResult& result);

/// One JSON record per controller; runtime is excluded so reruns are byte-identical.
std::string summary_json(const ComparisonReport& report);
std::string summary_json(const ScenarioResult& result, double ramp_limit_kw_per_step);

/// `controller,mode,total_violation_kw,violation_count,max_violation_kw,final_batt_soc_pct,evs_completed,error`
std::string comparison_csv(const ComparisonReport& report);

}  // namespace nanogrid
