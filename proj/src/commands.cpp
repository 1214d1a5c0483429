#include "nanogrid/commands.hpp"

#include "nanogrid/errors.hpp"
#include "nanogrid/tuning.hpp"
#include "csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <system_error>

namespace nanogrid {

namespace {

std::string file_safe(const std::string& name)
{
    std::string out = name;
    for (char& ch : out) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                        ch == '_' || ch == '-';
        if (!ok) ch = '_';
    }
    return out;
}

bool needs_forecaster(const RunConfig& config)
{
    return std::any_of(config.controllers.begin(), config.controllers.end(),
                       [](const ControllerSpec& c) { return c.mode != ControlMode::realtime; });
}

}  // namespace

Artifacts cmd_simulate(const RunConfig& config, const std::string& controller)
{
    if (config.controllers.empty()) {
        throw ConfigError("field 'controllers' must list at least one controller");
    }
    const std::string name = controller.empty() ? config.controllers.front().name : controller;
    const Scenario scenario = build_scenario(config);
    if (name == "baseline") {
        const ScenarioResult result = run_uncontrolled(scenario);
        return {{"trace.csv", trace_csv(result)},
                {"summary.json", summary_json(result, scenario.ramp_limit_kw_per_step)}};
    }
    const auto spec = std::find_if(config.controllers.begin(), config.controllers.end(),
                                   [&](const ControllerSpec& c) { return c.name == name; });
    if (spec == config.controllers.end()) {
        throw ConfigError("field 'controllers': no controller named '" + name + "'");
    }
    RunConfig one = config;
    one.controllers = {*spec};
    const auto forecaster = spec->mode == ControlMode::realtime ? nullptr : build_forecaster(config);
    const ScenarioResult result = run_controller(scenario, build_controllers(one, forecaster).front());
    return {{"trace.csv", trace_csv(result)}, {"summary.json", summary_json(result, scenario.ramp_limit_kw_per_step)}};
}

Artifacts cmd_compare(const RunConfig& config)
{
    const Scenario scenario = build_scenario(config);
    const auto forecaster = needs_forecaster(config) ? build_forecaster(config) : nullptr;
    const auto controllers = build_controllers(config, forecaster);
    const ComparisonReport report = compare(scenario, controllers);

    Artifacts out{{"comparison.csv", comparison_csv(report)}, {"summary.json", summary_json(report)}};
    for (const auto& row : report.rows) {
        if (row.result) {
            out.push_back({"trace_" + file_safe(row.name) + ".csv", trace_csv(*row.result)});
        }
    }
    return out;
}

Artifacts cmd_tune(const RunConfig& config)
{
    const Scenario scenario = build_scenario(config);
    const ControllerSpec* base = nullptr;
    for (const auto& c : config.controllers) {
        const bool wanted = config.tune.base ? c.name == *config.tune.base : c.mode == ControlMode::predictive_ma;
        if (wanted) {
            base = &c;
            break;
        }
    }
    if (!base) {
        throw ConfigError(config.tune.base ? "field 'tune.base': no controller named '" + *config.tune.base + "'"
                                           : "field 'tune.base': no predictive_ma controller to tune");
    }
    RunConfig one = config;
    one.controllers = {*base};
    one.controllers.front().mode = ControlMode::predictive_ma;
    const auto forecaster = build_forecaster(config);
    ControllerConfig cfg = build_controllers(one, forecaster).front();

    std::vector<int> candidates = config.tune.candidates;
    if (candidates.empty()) {
        for (int n = 0; n < cfg.h; n += 5) candidates.push_back(n);
        candidates.push_back(cfg.h);
    }
    TuningReport report;
    try {
        report = tune_window(scenario, candidates, cfg);
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("field 'tune.candidates': ") + e.what());
    }

    nlohmann::ordered_json j;
    j["controller"] = cfg.name;
    j["h"] = cfg.h;
    j["best_n"] = report.best_n;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        j["rows"].push_back({{"n", row.n}, {"total_violation_kw", row.total_violation_kw}});
    }
    return {{"tuning.csv", tuning_csv(report)}, {"tuning.json", j.dump(2) + "\n"}};
}

Artifacts cmd_forecast_eval(const RunConfig& config)
{
    if (!config.forecaster) {
        throw ConfigError("field 'forecaster' is required by forecast-eval");
    }
    const Scenario scenario = build_scenario(config);
    const auto model = build_forecaster(config);
    const ErrorReport report = evaluate(*model, scenario.pv, scenario.load);

    std::string csv = "lead,mae_pv_kw,rmse_pv_kw,mae_load_kw,rmse_load_kw\n";
    for (const auto& e : report.leads) {
        csv += std::to_string(e.lead) + "," + detail::format_fixed(e.mae_pv) + "," + detail::format_fixed(e.rmse_pv) +
               "," + detail::format_fixed(e.mae_load) + "," + detail::format_fixed(e.rmse_load) + "\n";
    }
    return {{"forecast_eval.csv", csv}, {"forecast_model.json", model_to_json(*model)}};
}

Artifacts cmd_synth(const RunConfig& config)
{
    const Scenario scenario = build_scenario(config);
    return {{"pv.csv", to_csv(scenario.pv)},
            {"load.csv", to_csv(scenario.load)},
            {"ev.csv", ev_csv(scenario.ev_sessions)}};
}

void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw DataError(dir.string() + ": cannot create output directory: " + ec.message());
    }
    std::vector<std::filesystem::path> staged;
    try {
        for (const auto& a : artifacts) {
            const auto tmp = dir / (a.name + ".tmp");
            staged.push_back(tmp);
            detail::write_file(tmp, a.contents);
        }
    } catch (...) {
        for (const auto& p : staged) std::filesystem::remove(p, ec);
        throw;
    }
    for (std::size_t i = 0; i < artifacts.size(); ++i) {
        std::filesystem::rename(staged[i], dir / artifacts[i].name, ec);
        if (ec) {
            throw DataError((dir / artifacts[i].name).string() + ": cannot write: " + ec.message());
        }
    }
}

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ParameterError*>(&e)) return 2;
    if (dynamic_cast<const DataError*>(&e)) return 3;
    if (dynamic_cast<const ModelError*>(&e)) return 4;
    return 1;
}

}  // namespace nanogrid
