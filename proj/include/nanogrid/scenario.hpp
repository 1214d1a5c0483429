#pragma once

#include "nanogrid/assets.hpp"
#include "nanogrid/timeseries.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nanogrid {

/// Everything a controller run needs: aligned PV and load, EV sessions,
/// the battery and its starting SoC, and the per-step ramp limit.
struct Scenario {
    PowerSeries pv;
    PowerSeries load;
    std::vector<EvSession> ev_sessions;
    BatterySpec battery;
    BatteryState battery_initial{50.0};
    double ramp_limit_kw_per_step = 0.4;
    int horizon_minutes = 15;

    std::size_t steps() const { return pv.size(); }
    int step_minutes() const { return pv.step_minutes(); }

    /// Throws on misaligned series, negative samples, bad ramp limit,
    /// an invalid battery or an initial SoC outside the band.
    void validate() const;
};

/// Ramp limit from the "percent of maximum load per minute" rule, scaled to
/// the series step.
double ramp_limit_from_percent(double percent, double max_load_kw, int step_minutes = 1);

/// EV sessions as CSV: `arrival_min,departure_min,capacity_kwh,soc_init_pct,p_max_kw,eta_ch`
/// plus optional `id` and `soc_target_pct` columns (the latter defaults to
/// `default_target_pct`). Malformed cells raise IngestionError, invalid
/// values ValidationError and unreachable targets InfeasibleError, each
/// naming the row.
std::vector<EvSession> parse_ev_csv(const std::string& text, const std::string& source,
                                    double default_target_pct = 90.0);
std::vector<EvSession> load_ev_csv(const std::filesystem::path& path, double default_target_pct = 90.0);
std::string ev_csv(const std::vector<EvSession>& sessions);

}  // namespace nanogrid
