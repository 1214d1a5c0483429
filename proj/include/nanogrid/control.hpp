#pragma once

#include "nanogrid/assets.hpp"
#include "nanogrid/forecast.hpp"
#include "nanogrid/result.hpp"
#include "nanogrid/scenario.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nanogrid {

enum class ControlMode { realtime, predictive_ma, predictive_var };
enum class AllocationOrder { battery_first, ev_first };

std::string to_string(ControlMode mode);
ControlMode control_mode_from_string(const std::string& name);
std::string to_string(AllocationOrder order);
AllocationOrder allocation_order_from_string(const std::string& name);

struct ControllerConfig {
    std::string name = "realtime";
    ControlMode mode = ControlMode::realtime;
    AllocationOrder allocation_order = AllocationOrder::battery_first;
    /// Moving-average half-window (predictive_ma).
    int n = 5;
    /// Look-ahead in steps (both predictive modes); at most the forecaster horizon.
    int h = 15;
    std::shared_ptr<const ForecastModel> forecaster;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Setpoints for one step. `p_ev_kw` is aligned with the sessions passed to
/// dispatch_step.
struct Dispatch {
    double p_batt_ch_kw = 0.0;
    double p_batt_dis_kw = 0.0;
    std::vector<double> p_ev_kw;
    double achieved_output_kw = 0.0;
    double residual_kw = 0.0;

    double ev_total_kw() const;
};

/// Net output with the battery idle and every connected EV at its default
/// (maximum useful) rate.
double raw_net_output(double pv_kw, double load_kw, std::span<const EvSession> active_sessions, int dt_minutes);

/// Closed-form solution of the single-step tracking problem
///   min |(pv - load - p_ch + p_dis - sum p_ev) - p_ref|
/// over the battery's feasible injection interval and each session's
/// [ev_min_rate, ev_max_rate] band. The required adjustment is projected
/// onto the summed interval; within the optimal set the adjustment goes to
/// the resource named first by `order`, and EV curtailment is split across
/// sessions in proportion to their headroom.
Dispatch dispatch_step(double pv_kw, double load_kw, double p_ref_kw, BatteryState battery, const BatterySpec& spec,
                       std::span<const EvSession> active_sessions, int now_min, int dt_minutes,
                       AllocationOrder order = AllocationOrder::battery_first);

/// Tracks the ramp-clamped raw net output using current data only.
ScenarioResult run_realtime(const Scenario& scenario,
                            AllocationOrder order = AllocationOrder::battery_first);

/// Receding-horizon tracking of a look-ahead target rebuilt from fresh
/// forecasts every step.
ScenarioResult run_predictive(const Scenario& scenario, const ControllerConfig& config);

/// Battery idle, EVs at their default rate.
ScenarioResult run_uncontrolled(const Scenario& scenario);

/// Dispatches on `config.mode`.
ScenarioResult run_controller(const Scenario& scenario, const ControllerConfig& config);

}  // namespace nanogrid
