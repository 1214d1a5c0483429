#include "nanogrid/commands.hpp"
#include "nanogrid/errors.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace nanogrid;
namespace fs = std::filesystem;

namespace {

// Small and quick: perfect forecasts, no training.
const char* kFastConfig = R"({
  "seed": 3,
  "forecaster": { "kind": "perfect", "horizon": 30 },
  "controllers": [
    { "name": "realtime", "mode": "realtime" },
    { "name": "predictive_ma", "mode": "predictive_ma", "n": 15, "h": 30 },
    { "name": "predictive_var", "mode": "predictive_var", "h": 30 }
  ],
  "tune": { "candidates": [0, 15, 30] }
})";

class TempDir {
public:
    TempDir()
    {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("nanogrid_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

    fs::path write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path_ / name) << text;
        return path_ / name;
    }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(NANOGRID_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t file_count(const fs::path& dir)
{
    if (!fs::exists(dir)) return 0;
    return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}));
}

}  // namespace

TEST(Config, DefaultsMatchCaseStudy)
{
    const auto cfg = RunConfig::defaults();
    EXPECT_DOUBLE_EQ(effective_ramp_limit(cfg), 0.4);
    ASSERT_EQ(cfg.controllers.size(), 3u);
    EXPECT_EQ(cfg.controllers[1].n, 50);
    ASSERT_TRUE(cfg.forecaster.has_value());
    EXPECT_EQ(cfg.forecaster->training.horizon, 75);
    const auto sc = build_scenario(cfg);
    EXPECT_EQ(sc.ev_sessions.size(), 4u);
    EXPECT_DOUBLE_EQ(sc.battery.capacity_kwh, 40.0);
}

TEST(Config, BundledFileEqualsDefaults)
{
    const auto file = load_run_config(fs::path(NANOGRID_SOURCE_DIR) / "configs" / "default.json");
    const auto def = RunConfig::defaults();
    EXPECT_EQ(file.seed, def.seed);
    EXPECT_EQ(file.controllers.size(), def.controllers.size());
    EXPECT_EQ(file.forecaster->training.epochs, def.forecaster->training.epochs);
    EXPECT_EQ(trace_csv(run_uncontrolled(build_scenario(file))), trace_csv(run_uncontrolled(build_scenario(def))));
}

TEST(Config, UnknownKeyNamesField)
{
    try {
        parse_run_config(R"({"battery": {"capacity": 40}})", "cfg.json");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("battery.capacity"), std::string::npos) << msg;
        EXPECT_NE(msg.find("cfg.json"), std::string::npos) << msg;
    }
}

TEST(Config, TypeAndShapeErrors)
{
    EXPECT_THROW(parse_run_config("{", "c"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"seed": "one"})", "c"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"controllers": []})", "c"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"controllers": [{"mode": "mpc"}]})", "c"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"ramp": {"kw_per_step": 0.4, "percent_of_max_load": 1}})", "c"),
                 ConfigError);
    EXPECT_THROW(parse_run_config(R"({"scenario": {}})", "c"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"battery": {"soc_min_pct": 95}})", "c"), ConfigError);
    EXPECT_THROW(parse_run_config(R"({"forecaster": {"optimizer": "sgd"}})", "c"), ConfigError);
}

TEST(Config, RampRules)
{
    auto cfg = parse_run_config(R"({"ramp": {"kw_per_step": 0.8}})", "c");
    EXPECT_DOUBLE_EQ(effective_ramp_limit(cfg), 0.8);
    cfg = parse_run_config(R"({"ramp": {"percent_of_max_load": 2}})", "c");
    EXPECT_DOUBLE_EQ(effective_ramp_limit(cfg), 0.8);
    const auto files =
        parse_run_config(R"({"scenario": {"files": {"pv_csv": "a.csv", "load_csv": "b.csv"}}})", "c", "/data");
    EXPECT_EQ(files.files->pv_csv, fs::path("/data/a.csv"));
    EXPECT_THROW(effective_ramp_limit(files), ConfigError);
}

TEST(Config, MissingForecasterNamesField)
{
    const auto cfg = parse_run_config(R"({"forecaster": null})", "c");
    EXPECT_EQ(build_forecaster(cfg), nullptr);
    try {
        build_controllers(cfg, nullptr);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("forecaster"), std::string::npos) << e.what();
    }
    try {
        cmd_compare(cfg);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("forecaster"), std::string::npos) << e.what();
    }
}

TEST(Config, HorizonBeyondForecasterIsRejected)
{
    const auto cfg = parse_run_config(
        R"({"forecaster": {"kind": "perfect", "horizon": 10},
            "controllers": [{"mode": "predictive_ma", "n": 5, "h": 20}]})",
        "c");
    EXPECT_THROW(build_controllers(cfg, build_forecaster(cfg)), ConfigError);
}

TEST(Config, InlineSessions)
{
    const auto cfg = parse_run_config(
        R"({"ev": {"soc_target_pct": 80, "sessions": [
              {"arrival_min": 600, "departure_min": 900, "soc_init_pct": 40}]}})",
        "c");
    const auto sc = build_scenario(cfg);
    ASSERT_EQ(sc.ev_sessions.size(), 1u);
    EXPECT_DOUBLE_EQ(sc.ev_sessions[0].soc_target_pct, 80.0);
    EXPECT_THROW(parse_run_config(R"({"ev": {"sessions": [{"arrival_min": 600, "departure_min": 610,
                                      "soc_init_pct": 10}]}})",
                                  "c"),
                 InfeasibleError);
}

TEST(Commands, SimulateEchoesPercentLimit)
{
    const auto cfg = parse_run_config(kFastConfig, "c");
    const auto out = cmd_simulate(cfg, "predictive_ma");
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].name, "trace.csv");
    const auto j = nlohmann::json::parse(out[1].contents);
    EXPECT_DOUBLE_EQ(j.at("ramp_limit_kw_per_step").get<double>(), 0.4);
    EXPECT_EQ(j["controllers"][0]["controller"], "predictive_ma");
    EXPECT_THROW(cmd_simulate(cfg, "nope"), ConfigError);
    EXPECT_NO_THROW(cmd_simulate(cfg, "baseline"));
}

TEST(Commands, CompareMatchesSimulate)
{
    const auto cfg = parse_run_config(kFastConfig, "c");
    const auto out = cmd_compare(cfg);
    ASSERT_EQ(out.size(), 6u);  // comparison, summary, 4 traces
    const auto j = nlohmann::json::parse(out[1].contents);
    ASSERT_EQ(j["controllers"].size(), 4u);
    for (const auto& rec : j["controllers"]) {
        const std::string name = rec["controller"];
        const auto solo = nlohmann::json::parse(cmd_simulate(cfg, name)[1].contents);
        EXPECT_DOUBLE_EQ(rec["total_violation_kw"].get<double>(),
                         solo["controllers"][0]["total_violation_kw"].get<double>())
            << name;
    }
}

TEST(Commands, TuneReport)
{
    const auto cfg = parse_run_config(kFastConfig, "c");
    const auto out = cmd_tune(cfg);
    const auto j = nlohmann::json::parse(out[1].contents);
    ASSERT_EQ(j["rows"].size(), 3u);
    double best = 1e300;
    for (const auto& r : j["rows"]) best = std::min(best, r["total_violation_kw"].get<double>());
    for (const auto& r : j["rows"]) {
        if (r["n"] == j["best_n"]) {
            EXPECT_DOUBLE_EQ(r["total_violation_kw"].get<double>(), best);
        }
    }
    auto bad = cfg;
    bad.tune.candidates = {99};
    EXPECT_THROW(cmd_tune(bad), ConfigError);
}

TEST(Commands, ForecastEvalPerfectIsZero)
{
    const auto cfg = parse_run_config(kFastConfig, "c");
    const auto out = cmd_forecast_eval(cfg);
    std::istringstream in(out[0].contents);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "lead,mae_pv_kw,rmse_pv_kw,mae_load_kw,rmse_load_kw");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(line.substr(line.find(',')), ",0.000000,0.000000,0.000000,0.000000");
    }
    EXPECT_EQ(rows, 30);
}

TEST(Commands, SynthFilesRoundTripAsFileScenario)
{
    TempDir dir;
    const auto cfg = parse_run_config(kFastConfig, "c");
    write_artifacts(dir.path(), cmd_synth(cfg));
    const auto file_cfg = parse_run_config(
        R"({"scenario": {"files": {"pv_csv": "pv.csv", "load_csv": "load.csv", "ev_csv": "ev.csv"}},
            "ramp": {"percent_of_max_load": 1, "max_load_kw": 40}, "forecaster": null,
            "controllers": [{"mode": "realtime"}]})",
        "c", dir.path());
    const auto a = build_scenario(cfg);
    const auto b = build_scenario(file_cfg);
    EXPECT_EQ(to_csv(a.pv), to_csv(b.pv));
    EXPECT_EQ(b.ev_sessions.size(), a.ev_sessions.size());
    EXPECT_NEAR(run_realtime(a).summary.total_violation_kw, run_realtime(b).summary.total_violation_kw, 1e-3);
}

TEST(Commands, ExitCodeMapping)
{
    EXPECT_EQ(exit_code_for(ConfigError("x")), 2);
    EXPECT_EQ(exit_code_for(ParameterError("x")), 2);
    EXPECT_EQ(exit_code_for(GapError("x")), 3);
    EXPECT_EQ(exit_code_for(InfeasibleError("x")), 4);
    EXPECT_EQ(exit_code_for(BoundsError("x")), 4);
    EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);
}

// ---------------------------------------------------------------------------
// The binary itself

TEST(Cli, SimulateTwiceIsByteIdentical)
{
    TempDir dir;
    const auto cfg = dir.write("fast.json", kFastConfig);
    const auto a = dir.path() / "a";
    const auto b = dir.path() / "b";
    ASSERT_EQ(run_cli("simulate --config " + cfg.string() + " --out " + a.string()), 0);
    ASSERT_EQ(run_cli("simulate --config " + cfg.string() + " --out " + b.string()), 0);
    EXPECT_EQ(slurp(a / "trace.csv"), slurp(b / "trace.csv"));
    EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
    EXPECT_FALSE(slurp(a / "trace.csv").empty());
}

TEST(Cli, CompareWritesFourRows)
{
    TempDir dir;
    const auto cfg = dir.write("fast.json", kFastConfig);
    ASSERT_EQ(run_cli("compare --config " + cfg.string() + " --out " + dir.path().string() + "/out"), 0);
    const std::string csv = slurp(dir.path() / "out" / "comparison.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    for (const char* name : {"baseline", "realtime", "predictive_ma", "predictive_var"}) {
        EXPECT_TRUE(fs::exists(dir.path() / "out" / (std::string("trace_") + name + ".csv"))) << name;
    }
}

TEST(Cli, SeedFlagChangesScenario)
{
    TempDir dir;
    const auto cfg = dir.write("fast.json", kFastConfig);
    ASSERT_EQ(run_cli("synth --config " + cfg.string() + " --seed 1 --out " + (dir.path() / "s1").string()), 0);
    ASSERT_EQ(run_cli("synth --config " + cfg.string() + " --seed 2 --out " + (dir.path() / "s2").string()), 0);
    EXPECT_NE(slurp(dir.path() / "s1" / "pv.csv"), slurp(dir.path() / "s2" / "pv.csv"));
}

TEST(Cli, ConfigErrorExitsTwoWithoutFiles)
{
    TempDir dir;
    const auto cfg = dir.write("bad.json", R"({"batery": {}})");
    const auto out = dir.path() / "out";
    EXPECT_EQ(run_cli("compare --config " + cfg.string() + " --out " + out.string()), 2);
    EXPECT_EQ(file_count(out), 0u);
    EXPECT_EQ(run_cli("compare --no-such-flag"), 2);
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("simulate --config " + (dir.path() / "missing.json").string()), 2);
}

TEST(Cli, DataErrorExitsThreeWithoutFiles)
{
    TempDir dir;
    dir.write("pv.csv", "timestamp,kw\n0,1\n1,1\n3,1\n");
    dir.write("load.csv", "timestamp,kw\n0,1\n1,1\n2,1\n");
    const auto cfg = dir.write("gap.json", R"({"scenario": {"files": {"pv_csv": "pv.csv", "load_csv": "load.csv"}},
        "ramp": {"kw_per_step": 0.4}, "forecaster": null, "controllers": [{"mode": "realtime"}]})");
    const auto out = dir.path() / "out";
    EXPECT_EQ(run_cli("simulate --config " + cfg.string() + " --out " + out.string()), 3);
    EXPECT_EQ(file_count(out), 0u);
}

TEST(Cli, ModelErrorExitsFour)
{
    TempDir dir;
    const auto cfg = dir.write("inf.json", R"({"ev": {"sessions": [
        {"arrival_min": 600, "departure_min": 610, "soc_init_pct": 10}]}, "forecaster": null,
        "controllers": [{"mode": "realtime"}]})");
    const auto out = dir.path() / "out";
    EXPECT_EQ(run_cli("simulate --config " + cfg.string() + " --out " + out.string()), 4);
    EXPECT_EQ(file_count(out), 0u);
    const auto model = dir.write("bad_model.json", R"({"forecaster": {"model_file": "nope.json"}})");
    EXPECT_EQ(run_cli("forecast-eval --config " + model.string() + " --out " + out.string()), 4);
}
