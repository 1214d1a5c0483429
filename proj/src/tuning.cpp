#include "nanogrid/tuning.hpp"

#include "nanogrid/errors.hpp"
#include "csv.hpp"

#include <algorithm>
#include <future>

namespace nanogrid {

namespace {

// Totals closer than this count as a tie.
constexpr double kTieToleranceKw = 1e-9;

}  // namespace

TuningReport tune_window(const Scenario& scenario, std::span<const int> candidate_ns, const ControllerConfig& base,
                         bool concurrent)
{
    if (candidate_ns.empty()) {
        throw ParameterError("tune_window: candidate set is empty");
    }
    std::vector<int> ns(candidate_ns.begin(), candidate_ns.end());
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    for (int n : ns) {
        if (n < 0 || n > base.h) {
            throw ParameterError("tune_window: candidate n=" + std::to_string(n) + " outside [0, h=" +
                                 std::to_string(base.h) + "]");
        }
    }

    const auto policy = concurrent ? std::launch::async : std::launch::deferred;
    std::vector<std::future<double>> jobs;
    for (int n : ns) {
        ControllerConfig cfg = base;
        cfg.mode = ControlMode::predictive_ma;
        cfg.n = n;
        cfg.name = "ma_n" + std::to_string(n);
        jobs.push_back(std::async(policy, [&scenario, cfg] {
            return run_predictive(scenario, cfg).summary.total_violation_kw;
        }));
    }

    TuningReport report;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        report.rows.push_back(TuningRow{ns[i], jobs[i].get()});
    }
    const TuningRow* best = &report.rows.front();
    for (const auto& row : report.rows) {
        if (row.total_violation_kw < best->total_violation_kw - kTieToleranceKw) {
            best = &row;
        }
    }
    report.best_n = best->n;
    return report;
}

std::string tuning_csv(const TuningReport& report)
{
    std::string out = "n,total_violation_kw\n";
    for (const auto& row : report.rows) {
        out += std::to_string(row.n) + "," + detail::format_fixed(row.total_violation_kw) + "\n";
    }
    return out;
}

}  // namespace nanogrid
