#include "nanogrid/assets.hpp"

#include "nanogrid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nanogrid {

namespace {

// Rates equal to a cap may arrive with rounding noise from upstream arithmetic.
constexpr double kRateSlackKw = 1e-9;

double hours(int dt_minutes) { return dt_minutes / 60.0; }

void require_positive_dt(int dt_minutes, const char* where)
{
    if (dt_minutes < 1) {
        throw ContractError(std::string(where) + ": dt_minutes must be >= 1");
    }
}

}  // namespace

void BatterySpec::validate() const
{
    if (!(capacity_kwh > 0.0)) {
        throw ParameterError("battery: capacity_kwh must be > 0");
    }
    if (!(p_max_kw > 0.0) || (p_max_dis_kw && !(*p_max_dis_kw > 0.0))) {
        throw ParameterError("battery: p_max_kw must be > 0");
    }
    if (!(eta_ch > 0.0 && eta_ch <= 1.0) || !(eta_dis > 0.0 && eta_dis <= 1.0)) {
        throw ParameterError("battery: efficiencies must lie in (0, 1]");
    }
    if (!(soc_min_pct >= 0.0 && soc_min_pct < soc_max_pct && soc_max_pct <= 100.0)) {
        throw ParameterError("battery: need 0 <= soc_min_pct < soc_max_pct <= 100");
    }
}

BatteryState battery_step(BatteryState state, const BatterySpec& spec, double p_ch_kw, double p_dis_kw,
                          int dt_minutes)
{
    require_positive_dt(dt_minutes, "battery_step");
    if (p_ch_kw < 0.0 || p_dis_kw < 0.0) {
        throw ContractError("battery_step: charge and discharge powers must be >= 0");
    }
    if (p_ch_kw > 0.0 && p_dis_kw > 0.0) {
        throw ContractError("battery_step: simultaneous charge and discharge");
    }
    if (p_ch_kw > spec.charge_cap_kw() + kRateSlackKw || p_dis_kw > spec.discharge_cap_kw() + kRateSlackKw) {
        throw ContractError("battery_step: power exceeds rate cap");
    }

    const double delta_kwh = (p_ch_kw * spec.eta_ch - p_dis_kw / spec.eta_dis) * hours(dt_minutes);
    double soc = state.soc_pct + delta_kwh * 100.0 / spec.capacity_kwh;

    if (soc > spec.soc_max_pct) {
        if (soc > spec.soc_max_pct + kSocTolerancePct) {
            std::ostringstream msg;
            msg << "battery_step: SoC " << soc << "% exceeds soc_max_pct " << spec.soc_max_pct << "%";
            throw BoundsError(msg.str());
        }
        soc = spec.soc_max_pct;
    } else if (soc < spec.soc_min_pct) {
        if (soc < spec.soc_min_pct - kSocTolerancePct) {
            std::ostringstream msg;
            msg << "battery_step: SoC " << soc << "% below soc_min_pct " << spec.soc_min_pct << "%";
            throw BoundsError(msg.str());
        }
        soc = spec.soc_min_pct;
    }
    return BatteryState{soc};
}

InjectionRange feasible_battery_range(BatteryState state, const BatterySpec& spec, int dt_minutes)
{
    require_positive_dt(dt_minutes, "feasible_battery_range");
    const double kwh_per_pct = spec.capacity_kwh / 100.0;
    const double headroom_up_kwh = std::max(0.0, spec.soc_max_pct - state.soc_pct) * kwh_per_pct;
    const double headroom_down_kwh = std::max(0.0, state.soc_pct - spec.soc_min_pct) * kwh_per_pct;

    const double charge_limit = headroom_up_kwh / (spec.eta_ch * hours(dt_minutes));
    const double discharge_limit = headroom_down_kwh * spec.eta_dis / hours(dt_minutes);
    return InjectionRange{-std::min(spec.charge_cap_kw(), charge_limit),
                          std::min(spec.discharge_cap_kw(), discharge_limit)};
}

BatteryCommand split_injection(double injection_kw)
{
    if (injection_kw >= 0.0) {
        return BatteryCommand{0.0, injection_kw};
    }
    return BatteryCommand{-injection_kw, 0.0};
}

// ---------------------------------------------------------------------------

EvSession EvSession::make(int id, int arrival_min, int departure_min, double capacity_kwh, double soc_init_pct,
                          double p_max_kw, double eta_ch, double soc_target_pct)
{
    EvSession s;
    s.id = id;
    s.arrival_min = arrival_min;
    s.departure_min = departure_min;
    s.capacity_kwh = capacity_kwh;
    s.soc_init_pct = soc_init_pct;
    s.soc_target_pct = soc_target_pct;
    s.p_max_kw = p_max_kw;
    s.eta_ch = eta_ch;
    s.soc_pct = soc_init_pct;

    const std::string who = s.label();
    if (arrival_min >= departure_min) {
        throw ParameterError(who + ": arrival_min must precede departure_min");
    }
    if (!(capacity_kwh > 0.0) || !(p_max_kw > 0.0)) {
        throw ParameterError(who + ": capacity_kwh and p_max_kw must be > 0");
    }
    if (!(eta_ch > 0.0 && eta_ch <= 1.0)) {
        throw ParameterError(who + ": eta_ch must lie in (0, 1]");
    }
    if (!(soc_init_pct >= 0.0 && soc_init_pct <= soc_target_pct && soc_target_pct <= 100.0)) {
        throw ParameterError(who + ": need 0 <= soc_init_pct <= soc_target_pct <= 100");
    }
    const double need_kwh = (soc_target_pct - soc_init_pct) / 100.0 * capacity_kwh;
    const double deliverable_kwh = p_max_kw * eta_ch * hours(departure_min - arrival_min);
    if (need_kwh > deliverable_kwh + 1e-9) {
        std::ostringstream msg;
        msg << who << ": infeasible, needs " << need_kwh << " kWh but at most " << deliverable_kwh
            << " kWh can be delivered before departure";
        throw InfeasibleError(msg.str());
    }
    return s;
}

std::string EvSession::label() const
{
    return "EV session " + std::to_string(id);
}

EvSession ev_step(EvSession session, double p_ev_kw, int dt_minutes)
{
    require_positive_dt(dt_minutes, "ev_step");
    if (p_ev_kw < 0.0) {
        throw ContractError(session.label() + ": negative charging rate (vehicle-to-grid is not supported)");
    }
    if (p_ev_kw > session.p_max_kw + kRateSlackKw) {
        throw ContractError(session.label() + ": charging rate exceeds station p_max_kw");
    }
    session.soc_pct += p_ev_kw * session.eta_ch * hours(dt_minutes) * 100.0 / session.capacity_kwh;
    session.soc_pct = std::min(session.soc_pct, 100.0);
    return session;
}

double ev_min_rate(const EvSession& session, int now_min, int dt_minutes)
{
    require_positive_dt(dt_minutes, "ev_min_rate");
    if (!session.active_at(now_min)) {
        throw ContractError(session.label() + ": not connected at minute " + std::to_string(now_min));
    }
    // Aim a hair above the target so rounding never leaves the vehicle short.
    const double goal_pct = std::min(100.0, session.soc_target_pct + kSocTolerancePct);
    const double need_kwh = std::max(0.0, goal_pct - session.soc_pct) / 100.0 * session.capacity_kwh;
    const int after_min = std::max(0, session.departure_min - (now_min + dt_minutes));
    const double later_kwh = session.p_max_kw * session.eta_ch * hours(after_min);
    const double rate = std::max(0.0, (need_kwh - later_kwh) / (session.eta_ch * hours(dt_minutes)));

    // Infeasibility is judged against the real target, not the padded goal.
    const double strict_need_kwh =
        std::max(0.0, session.soc_target_pct - session.soc_pct) / 100.0 * session.capacity_kwh;
    const double strict_rate = std::max(0.0, (strict_need_kwh - later_kwh) / (session.eta_ch * hours(dt_minutes)));
    if (strict_rate > session.p_max_kw + kRateSlackKw) {
        std::ostringstream msg;
        msg << session.label() << ": infeasible at minute " << now_min << ", needs " << strict_rate
            << " kW this step but p_max_kw is " << session.p_max_kw;
        throw InfeasibleError(msg.str());
    }
    return std::min(rate, session.p_max_kw);
}

double ev_max_rate(const EvSession& session, int dt_minutes)
{
    require_positive_dt(dt_minutes, "ev_max_rate");
    const double to_full_kwh = std::max(0.0, 100.0 - session.soc_pct) / 100.0 * session.capacity_kwh;
    return std::min(session.p_max_kw, to_full_kwh / (session.eta_ch * hours(dt_minutes)));
}

}  // namespace nanogrid
