#include "nanogrid/control.hpp"

#include "nanogrid/errors.hpp"
#include "nanogrid/metrics.hpp"
#include "nanogrid/target.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>

namespace nanogrid {

std::string to_string(ControlMode mode)
{
    switch (mode) {
    case ControlMode::realtime: return "realtime";
    case ControlMode::predictive_ma: return "predictive_ma";
    case ControlMode::predictive_var: return "predictive_var";
    }
    return "unknown";
}

ControlMode control_mode_from_string(const std::string& name)
{
    if (name == "realtime") return ControlMode::realtime;
    if (name == "predictive_ma") return ControlMode::predictive_ma;
    if (name == "predictive_var") return ControlMode::predictive_var;
    throw ConfigError("unknown controller mode '" + name + "' (expected realtime, predictive_ma or predictive_var)");
}

std::string to_string(AllocationOrder order)
{
    return order == AllocationOrder::battery_first ? "battery_first" : "ev_first";
}

AllocationOrder allocation_order_from_string(const std::string& name)
{
    if (name == "battery_first") return AllocationOrder::battery_first;
    if (name == "ev_first") return AllocationOrder::ev_first;
    throw ConfigError("unknown allocation_order '" + name + "' (expected battery_first or ev_first)");
}

void ControllerConfig::validate() const
{
    if (mode == ControlMode::realtime) {
        return;
    }
    const std::string who = "controller '" + name + "': ";
    if (!forecaster) {
        throw ConfigError(who + "field 'forecaster' is required for mode " + to_string(mode));
    }
    if (h < 1) {
        throw ConfigError(who + "field 'h' must be >= 1");
    }
    if (h > forecaster->horizon) {
        throw ConfigError(who + "field 'h' (" + std::to_string(h) + ") exceeds the forecaster horizon (" +
                          std::to_string(forecaster->horizon) + ")");
    }
    if (mode == ControlMode::predictive_ma && (n < 0 || n > h)) {
        throw ConfigError(who + "field 'n' must lie in [0, h]");
    }
}

double Dispatch::ev_total_kw() const
{
    return std::accumulate(p_ev_kw.begin(), p_ev_kw.end(), 0.0);
}

double raw_net_output(double pv_kw, double load_kw, std::span<const EvSession> active_sessions, int dt_minutes)
{
    double ev = 0.0;
    for (const auto& s : active_sessions) {
        ev += ev_max_rate(s, dt_minutes);
    }
    return pv_kw - load_kw - ev;
}

Dispatch dispatch_step(double pv_kw, double load_kw, double p_ref_kw, BatteryState battery, const BatterySpec& spec,
                       std::span<const EvSession> active_sessions, int now_min, int dt_minutes, AllocationOrder order)
{
    if (!std::isfinite(p_ref_kw)) {
        throw ContractError("dispatch_step: p_ref is not finite");
    }
    const std::size_t k = active_sessions.size();
    std::vector<double> ev_hi(k), ev_headroom(k);
    double ev_default = 0.0;
    double curtail_cap = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double lo = ev_min_rate(active_sessions[i], now_min, dt_minutes);
        ev_hi[i] = ev_max_rate(active_sessions[i], dt_minutes);
        ev_headroom[i] = std::max(0.0, ev_hi[i] - lo);
        ev_default += ev_hi[i];
        curtail_cap += ev_headroom[i];
    }
    const InjectionRange batt = feasible_battery_range(battery, spec, dt_minutes);

    // Adjustment x = b + c raises the output: b is net battery injection,
    // c >= 0 is total EV curtailment below the default rates.
    const double raw = pv_kw - load_kw - ev_default;
    const double wanted = p_ref_kw - raw;
    const double x = std::clamp(wanted, batt.min_kw, batt.max_kw + curtail_cap);

    double b = 0.0, c = 0.0;
    if (order == AllocationOrder::battery_first) {
        b = std::clamp(x, batt.min_kw, batt.max_kw);
        c = std::clamp(x - b, 0.0, curtail_cap);
    } else {
        c = std::clamp(x, 0.0, curtail_cap);
        b = std::clamp(x - c, batt.min_kw, batt.max_kw);
    }

    Dispatch d;
    const BatteryCommand cmd = split_injection(b);
    d.p_batt_ch_kw = cmd.p_ch_kw;
    d.p_batt_dis_kw = cmd.p_dis_kw;
    d.p_ev_kw.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double share = curtail_cap > 0.0 ? c * ev_headroom[i] / curtail_cap : 0.0;
        d.p_ev_kw[i] = std::max(0.0, ev_hi[i] - share);
    }
    d.achieved_output_kw = pv_kw - load_kw - d.p_batt_ch_kw + d.p_batt_dis_kw - d.ev_total_kw();
    d.residual_kw = std::abs(d.achieved_output_kw - p_ref_kw);
    return d;
}

// ---------------------------------------------------------------------------
// Scenario runner

namespace {

/// Data available to a target rule at step t.
struct StepContext {
    std::size_t t = 0;
    double pv_kw = 0.0;
    double load_kw = 0.0;
    double raw_net_kw = 0.0;
    std::span<const double> raw_history;  // raw net output at steps < t
};

using TargetRule = std::function<double(const StepContext&)>;

template <typename E>
[[noreturn]] void rethrow_at(std::size_t t, const E& e)
{
    throw E("step " + std::to_string(t) + ": " + e.what());
}

ScenarioResult simulate(const Scenario& scenario, const std::string& name, const TargetRule* rule,
                        AllocationOrder order)
{
    scenario.validate();
    const auto started = std::chrono::steady_clock::now();
    const std::size_t steps = scenario.steps();
    const int dt = scenario.step_minutes();
    const double limit = scenario.ramp_limit_kw_per_step;
    const auto pv = scenario.pv.values();
    const auto load = scenario.load.values();

    ScenarioResult result;
    result.controller = name;
    result.trace.reserve(steps);

    BatteryState battery = scenario.battery_initial;
    std::vector<EvSession> sessions = scenario.ev_sessions;
    std::vector<double> raw_history;
    raw_history.reserve(steps);
    std::vector<EvSession> active;
    std::vector<std::size_t> active_idx;
    double prev_output = 0.0;

    for (std::size_t t = 0; t < steps; ++t) {
        const int now = static_cast<int>(t) * dt;
        active.clear();
        active_idx.clear();
        for (std::size_t i = 0; i < sessions.size(); ++i) {
            if (sessions[i].active_at(now)) {
                active.push_back(sessions[i]);
                active_idx.push_back(i);
            }
        }

        TraceStep step;
        try {
            step.raw_net_kw = raw_net_output(pv[t], load[t], active, dt);
            if (t == 0) {
                prev_output = step.raw_net_kw;
            }
            if (rule == nullptr) {
                // Uncontrolled: battery idle, EVs at their default rate.
                step.target_kw = step.raw_net_kw;
                step.achieved_kw = step.raw_net_kw;
                for (std::size_t j = 0; j < active.size(); ++j) {
                    sessions[active_idx[j]] = ev_step(sessions[active_idx[j]], ev_max_rate(active[j], dt), dt);
                }
            } else {
                const StepContext ctx{t, pv[t], load[t], step.raw_net_kw, raw_history};
                const double target = (*rule)(ctx);
                step.target_kw = realtime_reference(prev_output, target, limit);
                const Dispatch d =
                    dispatch_step(pv[t], load[t], step.target_kw, battery, scenario.battery, active, now, dt, order);
                battery = battery_step(battery, scenario.battery, d.p_batt_ch_kw, d.p_batt_dis_kw, dt);
                for (std::size_t j = 0; j < active.size(); ++j) {
                    sessions[active_idx[j]] = ev_step(sessions[active_idx[j]], d.p_ev_kw[j], dt);
                }
                step.achieved_kw = d.achieved_output_kw;
            }
        } catch (const InfeasibleError& e) {
            rethrow_at(t, e);
        } catch (const BoundsError& e) {
            rethrow_at(t, e);
        } catch (const ContractError& e) {
            rethrow_at(t, e);
        } catch (const ModelError& e) {
            rethrow_at(t, e);
        }

        if (t > 0) {
            const double excess = std::abs(step.achieved_kw - prev_output) - limit;
            step.violation_kw = excess > kViolationToleranceKw ? excess : 0.0;
        }
        step.batt_soc_pct = battery.soc_pct;
        step.ev_soc_pct.reserve(sessions.size());
        for (const auto& s : sessions) {
            step.ev_soc_pct.push_back(s.soc_pct);
        }
        prev_output = step.achieved_kw;
        raw_history.push_back(step.raw_net_kw);
        result.trace.push_back(std::move(step));
    }

    result.summary = summarize_trace(result.trace);
    for (const auto& s : sessions) {
        result.summary.ev_completed.push_back(s.target_met());
    }
    result.summary.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return result;
}

}  // namespace

ScenarioResult run_uncontrolled(const Scenario& scenario)
{
    return simulate(scenario, "baseline", nullptr, AllocationOrder::battery_first);
}

ScenarioResult run_realtime(const Scenario& scenario, AllocationOrder order)
{
    const TargetRule rule = [](const StepContext& ctx) { return ctx.raw_net_kw; };
    return simulate(scenario, "realtime", &rule, order);
}

ScenarioResult run_predictive(const Scenario& scenario, const ControllerConfig& config)
{
    if (config.mode == ControlMode::realtime) {
        throw ConfigError("run_predictive: controller '" + config.name + "' is not predictive");
    }
    config.validate();
    const ForecastModel& model = *config.forecaster;
    const auto pv = scenario.pv.values();
    const auto load = scenario.load.values();
    const std::size_t steps = scenario.steps();

    std::vector<double> net_fcst;
    const TargetRule rule = [&](const StepContext& ctx) {
        const std::size_t t = ctx.t;
        // Horizon shrinks at the end of the series.
        const std::size_t ahead = std::min(static_cast<std::size_t>(config.h), steps - 1 - t);
        if (ahead == 0) {
            return ctx.raw_net_kw;
        }
        std::optional<FutureTruth> truth;
        if (model.kind == ForecastKind::perfect) {
            truth = FutureTruth{pv.subspan(t + 1, ahead), load.subspan(t + 1, ahead)};
        }
        const auto pv_win = history_window(pv, t, model.input_window);
        const auto load_win = history_window(load, t, model.input_window);
        const ForecastResult f = predict(model, pv_win, load_win, truth, t);

        // EV demand is held at its present default level over the horizon.
        const double ev_now = ctx.pv_kw - ctx.load_kw - ctx.raw_net_kw;
        if (config.mode == ControlMode::predictive_ma) {
            net_fcst.resize(ahead);
            for (std::size_t k = 0; k < ahead; ++k) {
                net_fcst[k] = f.pv_hat[k] - f.load_hat[k] - ev_now;
            }
            return moving_average_curve(ctx.raw_history, ctx.raw_net_kw, net_fcst, config.n);
        }
        return variance_curve(ctx.pv_kw, ctx.load_kw + ev_now, std::span<const double>(f.pv_hat).first(ahead));
    };
    return simulate(scenario, config.name, &rule, config.allocation_order);
}

ScenarioResult run_controller(const Scenario& scenario, const ControllerConfig& config)
{
    if (config.mode == ControlMode::realtime) {
        ScenarioResult r = run_realtime(scenario, config.allocation_order);
        r.controller = config.name;
        return r;
    }
    return run_predictive(scenario, config);
}

}  // namespace nanogrid
