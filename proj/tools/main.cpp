#include "nanogrid/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& flags)
{
    cmd->add_option("--config", flags.config, "JSON run configuration (built-in defaults when omitted)");
    cmd->add_option("--out", flags.out, "Output directory (overrides output.dir)");
    cmd->add_option("--seed", flags.seed, "Scenario seed (overrides seed)");
}

nanogrid::RunConfig resolve(const CommonFlags& flags)
{
    nanogrid::RunConfig cfg =
        flags.config.empty() ? nanogrid::RunConfig::defaults() : nanogrid::load_run_config(flags.config);
    if (!flags.out.empty()) cfg.out_dir = flags.out;
    if (flags.seed) cfg.seed = *flags.seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Ramp-rate constrained PV smoothing for a nanogrid with battery and EV charging"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string controller;
    auto* simulate = app.add_subcommand("simulate", "Run one controller and write its trace and summary");
    simulate->add_option("--controller", controller, "Controller name (default: first configured)");
    auto* compare = app.add_subcommand("compare", "Run every controller plus the uncontrolled baseline");
    auto* tune = app.add_subcommand("tune", "Select the moving-average window by total violation");
    auto* forecast_eval = app.add_subcommand("forecast-eval", "Per-lead forecast errors on the scenario day");
    auto* synth = app.add_subcommand("synth", "Write the scenario's PV, load and EV inputs");
    for (auto* cmd : {simulate, compare, tune, forecast_eval, synth}) {
        add_common(cmd, flags);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const nanogrid::RunConfig cfg = resolve(flags);
        nanogrid::Artifacts out;
        if (simulate->parsed()) {
            out = nanogrid::cmd_simulate(cfg, controller);
        } else if (compare->parsed()) {
            out = nanogrid::cmd_compare(cfg);
        } else if (tune->parsed()) {
            out = nanogrid::cmd_tune(cfg);
        } else if (forecast_eval->parsed()) {
            out = nanogrid::cmd_forecast_eval(cfg);
        } else {
            out = nanogrid::cmd_synth(cfg);
        }
        nanogrid::write_artifacts(cfg.out_dir, out);
        for (const auto& a : out) {
            std::cout << (cfg.out_dir / a.name).string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return nanogrid::exit_code_for(e);
    }
    return 0;
}
