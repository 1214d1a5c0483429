#pragma once

// Constructed scenarios shared by the unit tests and the acceptance suite.

#include "nanogrid/assets.hpp"
#include "nanogrid/control.hpp"
#include "nanogrid/scenario.hpp"

#include <random>
#include <utility>
#include <vector>

namespace fixture {

inline nanogrid::Scenario make_scenario(std::vector<double> pv, std::vector<double> load,
                                        std::vector<nanogrid::EvSession> sessions = {}, double soc_init = 50.0,
                                        double limit = 0.4)
{
    return nanogrid::Scenario{nanogrid::PowerSeries::from_values(std::move(pv)),
                              nanogrid::PowerSeries::from_values(std::move(load)),
                              std::move(sessions),
                              nanogrid::BatterySpec{},
                              nanogrid::BatteryState{soc_init},
                              limit,
                              15};
}

/// Flat 30 kW PV that drops to 15 kW for two hours, under a flat 10 kW load.
/// The 15 kW edge exceeds the 10 kW battery, so reacting after the fact must
/// violate the 0.4 kW/min limit. A centered average with n = 30 spreads the
/// edge over 61 minutes (0.25 kW/min) and never asks the battery for more
/// than 7.5 kW, so looking ahead can avoid every violation.
inline nanogrid::Scenario square_dip()
{
    std::vector<double> pv(600, 30.0);
    for (std::size_t t = 240; t < 360; ++t) pv[t] = 15.0;
    return make_scenario(std::move(pv), std::vector<double>(600, 10.0));
}

inline constexpr int kSquareDipN = 30;
inline constexpr int kSquareDipH = 30;

/// A feasible session inside [0, day): the target is reachable at p_max with
/// a random fraction of the window to spare, from tight to lax.
inline nanogrid::EvSession random_session(std::mt19937_64& rng, int id, int day = nanogrid::kMinutesPerDay,
                                          double target = 90.0)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int window = 20 + static_cast<int>(u(rng) * 600);
    const int arrival = static_cast<int>(u(rng) * (day - window));
    const double cap = 16.0 + 64.0 * u(rng);
    const double pmax = 3.3 + 7.7 * u(rng);
    const double eta = 0.85 + 0.15 * u(rng);
    const double deliverable_pct = pmax * eta * window / 60.0 * 100.0 / cap;
    const double soc_init = std::max(0.0, target - deliverable_pct * (0.5 + 0.5 * u(rng)));
    return nanogrid::EvSession::make(id, arrival, arrival + window, cap, soc_init, pmax, eta, target);
}

/// One dispatch problem: random PV, load, SoC, up to three connected EVs
/// with random slack, and a reference up to 30 kW away from the raw net.
struct DispatchInstance {
    double pv, load, p_ref;
    nanogrid::BatteryState battery;
    std::vector<nanogrid::EvSession> sessions;
    int now;
};

inline DispatchInstance random_instance(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DispatchInstance in;
    in.pv = 80.0 * u(rng);
    in.load = 5.0 + 35.0 * u(rng);
    in.battery = nanogrid::BatteryState{10.0 + 80.0 * u(rng)};
    in.now = 600;
    const int count = static_cast<int>(u(rng) * 4);
    for (int i = 0; i < count; ++i) {
        const int window = 1 + static_cast<int>(u(rng) * 240);
        const double cap = 16.0 + 40.0 * u(rng);
        const double pmax = 3.3 + 7.7 * u(rng);
        const double reach = pmax * 0.9 * window / 60.0 * 100.0 / cap;
        auto s = nanogrid::EvSession::make(i, in.now - 30, in.now + window, cap, 0.0, pmax, 0.9,
                                           std::min(90.0, reach));
        s.soc_pct = std::max(0.0, s.soc_target_pct - reach * u(rng));
        in.sessions.push_back(s);
    }
    const double raw = nanogrid::raw_net_output(in.pv, in.load, in.sessions, 1);
    in.p_ref = raw + (u(rng) - 0.5) * 60.0;
    return in;
}

}  // namespace fixture
