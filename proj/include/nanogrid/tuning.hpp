#pragma once

#include "nanogrid/control.hpp"
#include "nanogrid/scenario.hpp"

#include <span>
#include <string>
#include <vector>

namespace nanogrid {

struct TuningRow {
    int n = 0;
    double total_violation_kw = 0.0;
};

struct TuningReport {
    int best_n = 0;
    /// Sorted by n ascending.
    std::vector<TuningRow> rows;
};

/// Runs the moving-average predictive controller once per candidate
/// half-window and keeps the one with the least total violation; ties go to
/// the smaller n. `base` supplies the forecaster, h and allocation order.
TuningReport tune_window(const Scenario& scenario, std::span<const int> candidate_ns, const ControllerConfig& base,
                         bool concurrent = true);

/// `n,total_violation_kw`
std::string tuning_csv(const TuningReport& report);

}  // namespace nanogrid
