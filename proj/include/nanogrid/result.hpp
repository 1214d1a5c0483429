#pragma once

#include <string>
#include <vector>

namespace nanogrid {

struct TraceStep {
    double raw_net_kw = 0.0;
    double target_kw = 0.0;
    double achieved_kw = 0.0;
    double batt_soc_pct = 0.0;
    double violation_kw = 0.0;
    std::vector<double> ev_soc_pct;  // one entry per scenario session
};

struct ResultSummary {
    double total_violation_kw = 0.0;
    int violation_count = 0;
    double max_violation_kw = 0.0;
    double final_batt_soc_pct = 0.0;
    /// Per session: target SoC reached by departure (or by scenario end when
    /// the vehicle is still connected).
    std::vector<bool> ev_completed;
    double runtime_ms = 0.0;
};

struct ScenarioResult {
    std::string controller;
    std::vector<TraceStep> trace;
    ResultSummary summary;
};

}  // namespace nanogrid
