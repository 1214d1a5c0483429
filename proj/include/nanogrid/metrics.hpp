#pragma once

#include "nanogrid/result.hpp"

#include <span>
#include <vector>

namespace nanogrid {

/// Excess below this (kW) is rounding noise and does not count as a violation.
inline constexpr double kViolationToleranceKw = 1e-9;

struct ViolationReport {
    /// One entry per consecutive pair: max(0, |out[t] - out[t-1]| - limit).
    std::vector<double> per_step;
    double total_kw = 0.0;
};

ViolationReport violation(std::span<const double> output_kw, double ramp_limit_kw);

/// Recomputes the summary (violations, final SoC) from a finished trace.
/// `ev_completed` and `runtime_ms` are left for the caller.
ResultSummary summarize_trace(std::span<const TraceStep> trace);

}  // namespace nanogrid
