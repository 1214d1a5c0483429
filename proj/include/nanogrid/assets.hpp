#pragma once

#include <optional>
#include <string>

namespace nanogrid {

/// SoC values may overshoot a bound by this much from rounding; anything
/// within it is snapped back onto the bound.
inline constexpr double kSocTolerancePct = 1e-9;

struct BatterySpec {
    double capacity_kwh = 40.0;
    /// Symmetric charge/discharge cap unless `p_max_dis_kw` is set.
    double p_max_kw = 10.0;
    std::optional<double> p_max_dis_kw;
    double eta_ch = 0.9;
    double eta_dis = 0.9;
    double soc_min_pct = 10.0;
    double soc_max_pct = 90.0;

    double charge_cap_kw() const { return p_max_kw; }
    double discharge_cap_kw() const { return p_max_dis_kw.value_or(p_max_kw); }

    /// Throws ParameterError on the first violated invariant.
    void validate() const;
};

struct BatteryState {
    double soc_pct = 50.0;
};

/// Closed interval of net battery injection b = p_dis - p_ch in kW.
struct InjectionRange {
    double min_kw = 0.0;
    double max_kw = 0.0;
};

/// SoC update over one step. Charge and discharge may not both be positive;
/// both must respect the rate caps and the result must stay inside the SoC
/// band (callers pre-clamp through feasible_battery_range).
BatteryState battery_step(BatteryState state, const BatterySpec& spec, double p_ch_kw, double p_dis_kw,
                          int dt_minutes);

/// Net injections that honor both the rate caps and the SoC band after one step.
InjectionRange feasible_battery_range(BatteryState state, const BatterySpec& spec, int dt_minutes);

/// Splits a net injection into (p_ch, p_dis) with at most one non-zero.
struct BatteryCommand {
    double p_ch_kw = 0.0;
    double p_dis_kw = 0.0;
};
BatteryCommand split_injection(double injection_kw);

// ---------------------------------------------------------------------------

/// One vehicle's plug-in interval. Times are scenario-relative minutes;
/// the vehicle is connected on [arrival_min, departure_min).
struct EvSession {
    int id = 0;
    int arrival_min = 0;
    int departure_min = 0;
    double capacity_kwh = 24.0;
    double soc_init_pct = 30.0;
    double soc_target_pct = 90.0;
    double p_max_kw = 6.6;
    double eta_ch = 0.9;
    double soc_pct = 30.0;

    /// Builds a session at its initial SoC and checks that the target is
    /// reachable at full rate within the connection window.
    static EvSession make(int id, int arrival_min, int departure_min, double capacity_kwh, double soc_init_pct,
                          double p_max_kw, double eta_ch, double soc_target_pct = 90.0);

    bool active_at(int now_min) const { return arrival_min <= now_min && now_min < departure_min; }
    bool target_met() const { return soc_pct >= soc_target_pct - kSocTolerancePct; }
    std::string label() const;
};

/// Charges the vehicle for one step; SoC saturates at 100%.
EvSession ev_step(EvSession session, double p_ev_kw, int dt_minutes);

/// Lowest rate this step that keeps the target reachable by departure when
/// charging at p_max afterwards. Zero while slack exists.
double ev_min_rate(const EvSession& session, int now_min, int dt_minutes);

/// Highest useful rate this step: p_max, or less when the pack would fill.
double ev_max_rate(const EvSession& session, int dt_minutes);

}  // namespace nanogrid
