#include "nanogrid/metrics.hpp"

#include "nanogrid/errors.hpp"

#include <algorithm>
#include <cmath>

namespace nanogrid {

ViolationReport violation(std::span<const double> output_kw, double ramp_limit_kw)
{
    if (output_kw.size() < 2) {
        throw ParameterError("violation: series needs at least 2 samples");
    }
    if (!(ramp_limit_kw > 0.0)) {
        throw ParameterError("violation: ramp_limit_kw must be > 0");
    }
    ViolationReport report;
    report.per_step.reserve(output_kw.size() - 1);
    for (std::size_t t = 1; t < output_kw.size(); ++t) {
        const double excess = std::abs(output_kw[t] - output_kw[t - 1]) - ramp_limit_kw;
        const double v = excess > kViolationToleranceKw ? excess : 0.0;
        report.per_step.push_back(v);
        report.total_kw += v;
    }
    return report;
}

ResultSummary summarize_trace(std::span<const TraceStep> trace)
{
    ResultSummary s;
    for (const auto& step : trace) {
        s.total_violation_kw += step.violation_kw;
        if (step.violation_kw > 0.0) {
            ++s.violation_count;
        }
        s.max_violation_kw = std::max(s.max_violation_kw, step.violation_kw);
    }
    if (!trace.empty()) {
        s.final_batt_soc_pct = trace.back().batt_soc_pct;
    }
    return s;
}

}  // namespace nanogrid
