#include "nanogrid/sim.hpp"

#include "nanogrid/errors.hpp"
#include "csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <future>
#include <random>
#include <set>
#include <sstream>

namespace nanogrid {

const ComparisonRow* ComparisonReport::find(const std::string& name) const
{
    for (const auto& row : rows) {
        if (row.name == name) {
            return &row;
        }
    }
    return nullptr;
}

ComparisonReport compare(const Scenario& scenario, std::span<const ControllerConfig> controllers, bool concurrent)
{
    if (controllers.empty()) {
        throw ParameterError("compare: at least one controller is required");
    }
    std::set<std::string> names{"baseline"};
    for (const auto& c : controllers) {
        if (!names.insert(c.name).second) {
            throw ConfigError("compare: duplicate or reserved controller name '" + c.name + "'");
        }
    }
    scenario.validate();

    std::vector<ControllerConfig> ordered(controllers.begin(), controllers.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.name < b.name; });

    auto run_one = [&scenario](const ControllerConfig* config) {
        ComparisonRow row;
        row.name = config ? config->name : "baseline";
        row.mode = config ? to_string(config->mode) : "uncontrolled";
        try {
            const Scenario copy = scenario;
            row.result = config ? run_controller(copy, *config) : run_uncontrolled(copy);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        return row;
    };

    ComparisonReport report;
    report.ramp_limit_kw_per_step = scenario.ramp_limit_kw_per_step;
    const auto policy = concurrent ? std::launch::async : std::launch::deferred;
    std::vector<std::future<ComparisonRow>> jobs;
    jobs.push_back(std::async(policy, run_one, nullptr));
    for (const auto& c : ordered) {
        jobs.push_back(std::async(policy, run_one, &c));
    }
    for (auto& job : jobs) {
        report.rows.push_back(job.get());
    }
    return report;
}

// ---------------------------------------------------------------------------
// Synthetic scenario

std::vector<EvSession> default_ev_sessions(double soc_target_pct)
{
    return {
        EvSession::make(0, 480, 1020, 24.0, 20.0, 6.6, 0.9, soc_target_pct),
        EvSession::make(1, 540, 900, 24.0, 35.0, 6.6, 0.9, soc_target_pct),
        EvSession::make(2, 660, 1080, 24.0, 30.0, 6.6, 0.9, soc_target_pct),
        EvSession::make(3, 780, 1140, 24.0, 40.0, 6.6, 0.9, soc_target_pct),
    };
}

namespace {

struct DayPair {
    PowerSeries pv;
    PowerSeries load;
};

DayPair synth_day(std::uint64_t seed, const SyntheticDayOptions& o)
{
    // Independent streams for clouds, PV flicker and load noise.
    std::seed_seq seq{seed, std::uint64_t{0x9e3779b97f4a7c15ULL}};
    std::vector<std::uint64_t> sub(3);
    seq.generate(sub.begin(), sub.end());
    const auto events = random_cloud_events(sub[0], o.clouds, o.pv);
    LoadDayOptions load_opts;
    load_opts.base_kw = o.base_load_kw;
    load_opts.peak_kw = o.max_load_kw;
    load_opts.noise_kw = o.load_noise_kw;
    return {synth_pv_day(o.pv_peak_kw, events, sub[1], o.pv), synth_load_day(sub[2], load_opts)};
}

}  // namespace

Scenario bundled_scenario(std::uint64_t seed, const SyntheticDayOptions& options)
{
    DayPair day = synth_day(seed, options);
    Scenario s{std::move(day.pv), std::move(day.load), default_ev_sessions(options.ev_soc_target_pct),
               options.battery, options.battery_initial,
               ramp_limit_from_percent(options.ramp_percent_of_max_load, options.max_load_kw),
               options.horizon_minutes};
    s.validate();
    return s;
}

SyntheticHistory synthetic_history(std::uint64_t seed, int days, const SyntheticDayOptions& options)
{
    if (days < 1) {
        throw ParameterError("synthetic_history: days must be >= 1");
    }
    std::vector<double> pv, load;
    for (int d = 0; d < days; ++d) {
        const DayPair day = synth_day(seed + static_cast<std::uint64_t>(d), options);
        pv.insert(pv.end(), day.pv.values().begin(), day.pv.values().end());
        load.insert(load.end(), day.load.values().begin(), day.load.values().end());
    }
    return {PowerSeries::from_values(std::move(pv)), PowerSeries::from_values(std::move(load))};
}

std::vector<EvSession> random_ev_sessions(std::uint64_t seed, int count, int day_minutes, double soc_target_pct)
{
    if (count < 0 || day_minutes < 60) {
        throw ParameterError("random_ev_sessions: need count >= 0 and a day of at least 60 minutes");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<EvSession> out;
    while (static_cast<int>(out.size()) < count) {
        const int duration = 30 + static_cast<int>(unit(rng) * (std::min(720, day_minutes) - 30));
        const int arrival = static_cast<int>(unit(rng) * (day_minutes - duration));
        const double capacity = 16.0 + unit(rng) * 44.0;
        const double p_max = 3.3 + unit(rng) * 7.7;
        const double eta = 0.85 + unit(rng) * 0.15;
        const double soc_init = unit(rng) * soc_target_pct;
        const double need = (soc_target_pct - soc_init) / 100.0 * capacity;
        if (need > p_max * eta * duration / 60.0) {
            continue;
        }
        out.push_back(EvSession::make(static_cast<int>(out.size()), arrival, arrival + duration, capacity, soc_init,
                                      p_max, eta, soc_target_pct));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Writers

std::string trace_csv(const ScenarioResult& result)
{
    const std::size_t evs = result.trace.empty() ? 0 : result.trace.front().ev_soc_pct.size();
    std::string out = "step,raw_net_kw,target_kw,achieved_kw,batt_soc_pct,violation_kw";
    for (std::size_t i = 0; i < evs; ++i) {
        out += ",ev_" + std::to_string(i) + "_soc_pct";
    }
    out += '\n';
    for (std::size_t t = 0; t < result.trace.size(); ++t) {
        const auto& s = result.trace[t];
        out += std::to_string(t);
        for (double v : {s.raw_net_kw, s.target_kw, s.achieved_kw, s.batt_soc_pct, s.violation_kw}) {
            out += ',';
            out += detail::format_fixed(v);
        }
        for (double v : s.ev_soc_pct) {
            out += ',';
            out += detail::format_fixed(v);
        }
        out += '\n';
    }
    return out;
}

namespace {

nlohmann::ordered_json summary_record(const std::string& name, const std::string& mode, const ScenarioResult* r,
                                      const std::string& error)
{
    nlohmann::ordered_json j;
    j["controller"] = name;
    j["mode"] = mode;
    if (!r) {
        j["error"] = error;
        return j;
    }
    const auto& s = r->summary;
    j["total_violation_kw"] = s.total_violation_kw;
    j["violation_count"] = s.violation_count;
    j["max_violation_kw"] = s.max_violation_kw;
    j["final_batt_soc_pct"] = s.final_batt_soc_pct;
    j["ev_completed"] = s.ev_completed;
    j["steps"] = r->trace.size();
    return j;
}

}  // namespace

std::string summary_json(const ComparisonReport& report)
{
    nlohmann::ordered_json j;
    j["ramp_limit_kw_per_step"] = report.ramp_limit_kw_per_step;
    j["controllers"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        j["controllers"].push_back(
            summary_record(row.name, row.mode, row.result ? &*row.result : nullptr, row.error));
    }
    return j.dump(2) + "\n";
}

std::string summary_json(const ScenarioResult& result, double ramp_limit_kw_per_step)
{
    nlohmann::ordered_json j;
    j["ramp_limit_kw_per_step"] = ramp_limit_kw_per_step;
    j["controllers"] = nlohmann::ordered_json::array({summary_record(result.controller, "", &result, "")});
    j["controllers"][0].erase("mode");
    return j.dump(2) + "\n";
}

std::string comparison_csv(const ComparisonReport& report)
{
    std::string out =
        "controller,mode,total_violation_kw,violation_count,max_violation_kw,final_batt_soc_pct,evs_completed,error\n";
    for (const auto& row : report.rows) {
        out += row.name + "," + row.mode + ",";
        if (row.result) {
            const auto& s = row.result->summary;
            const auto done = std::count(s.ev_completed.begin(), s.ev_completed.end(), true);
            out += detail::format_fixed(s.total_violation_kw) + "," + std::to_string(s.violation_count) + "," +
                   detail::format_fixed(s.max_violation_kw) + "," + detail::format_fixed(s.final_batt_soc_pct) + "," +
                   std::to_string(done) + "/" + std::to_string(s.ev_completed.size()) + ",";
        } else {
            std::string msg = row.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            out += ",,,,," + msg;
        }
        out += '\n';
    }
    return out;
}

}  // namespace nanogrid
