#include "nanogrid/config.hpp"

#include "nanogrid/errors.hpp"
#include "csv.hpp"

#include <json.hpp>

#include <set>

namespace nanogrid {

namespace {

using json = nlohmann::json;

/// Typed access to one JSON object with the dotted field path kept for
/// error messages. `finish` rejects keys that were never read.
class Section {
public:
    Section(const json& j, std::string path, const std::string& source) : j_(j), path_(std::move(path)), source_(source)
    {
        if (!j_.is_object()) {
            throw ConfigError(source_ + ": field '" + (path_.empty() ? "<root>" : path_) + "' must be an object");
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    bool is_null(const std::string& key) const { return j_.contains(key) && j_.at(key).is_null(); }

    template <typename T>
    T get(const std::string& key, T fallback)
    {
        if (!has(key)) return fallback;
        return convert<T>(take(key), key);
    }

    template <typename T>
    std::optional<T> maybe(const std::string& key)
    {
        if (!has(key) || is_null(key)) {
            if (has(key)) take(key);
            return std::nullopt;
        }
        return convert<T>(take(key), key);
    }

    template <typename T>
    T require(const std::string& key)
    {
        if (!has(key)) fail(key, "is required");
        return convert<T>(take(key), key);
    }

    Section child(const std::string& key) { return Section(take(key), field(key), source_); }

    const json& take(const std::string& key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    const std::string& source() const { return source_; }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const
    {
        throw ConfigError(source_ + ": field '" + field(key) + "' " + what);
    }

    void finish() const
    {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) fail(key, "is not recognized");
        }
    }

private:
    template <typename T>
    T convert(const json& v, const std::string& key) const
    {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(key, "must be true or false");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(key, "must be a string");
            return v.get<std::string>();
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(key, "must be a non-negative integer");
            return v.get<std::uint64_t>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) fail(key, "must be an integer");
            return v.get<T>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) fail(key, "must be a number");
            return v.get<T>();
        } else if constexpr (std::is_same_v<T, std::vector<int>>) {
            if (!v.is_array()) fail(key, "must be an array of integers");
            std::vector<int> out;
            for (const auto& e : v) {
                if (!e.is_number_integer()) fail(key, "must be an array of integers");
                out.push_back(e.get<int>());
            }
            return out;
        } else {
            static_assert(sizeof(T) == 0, "unsupported config type");
        }
    }

    const json& j_;
    std::string path_;
    const std::string& source_;
    std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p)
{
    const std::filesystem::path path(p);
    return (path.is_absolute() || base.empty()) ? path : base / path;
}

void parse_synth(Section s, SyntheticDayOptions& o)
{
    o.pv_peak_kw = s.get("pv_peak_kw", o.pv_peak_kw);
    o.max_load_kw = s.get("max_load_kw", o.max_load_kw);
    o.base_load_kw = s.get("base_load_kw", o.base_load_kw);
    o.load_noise_kw = s.get("load_noise_kw", o.load_noise_kw);
    o.pv.sunrise_min = s.get("sunrise_min", o.pv.sunrise_min);
    o.pv.sunset_min = s.get("sunset_min", o.pv.sunset_min);
    o.pv.edge_ramp_min = s.get("cloud_edge_min", o.pv.edge_ramp_min);
    o.pv.flicker_fraction = s.get("flicker_fraction", o.pv.flicker_fraction);
    if (s.has("clouds")) {
        Section c = s.child("clouds");
        o.clouds.count = c.get("count", o.clouds.count);
        o.clouds.min_duration_min = c.get("min_duration_min", o.clouds.min_duration_min);
        o.clouds.max_duration_min = c.get("max_duration_min", o.clouds.max_duration_min);
        o.clouds.min_depth = c.get("min_depth", o.clouds.min_depth);
        o.clouds.max_depth = c.get("max_depth", o.clouds.max_depth);
        c.finish();
    }
    s.finish();
}

void parse_scenario(Section s, RunConfig& cfg)
{
    const bool has_synth = s.has("synth");
    const bool has_files = s.has("files");
    if (has_synth == has_files) {
        s.fail("synth", "or 'scenario.files' must be given, but not both");
    }
    if (has_synth) {
        SyntheticDayOptions o;
        parse_synth(s.child("synth"), o);
        cfg.synth = o;
        cfg.files.reset();
    } else {
        Section f = s.child("files");
        FileInputs in;
        in.pv_csv = f.require<std::string>("pv_csv");
        in.load_csv = f.require<std::string>("load_csv");
        if (auto ev = f.maybe<std::string>("ev_csv")) in.ev_csv = *ev;
        in.timestamp_column = f.get("timestamp_column", in.timestamp_column);
        in.value_column = f.get("value_column", in.value_column);
        f.finish();
        cfg.files = in;
        cfg.synth.reset();
    }
    s.finish();
}

void parse_battery(Section s, RunConfig& cfg)
{
    BatterySpec& b = cfg.battery;
    b.capacity_kwh = s.get("capacity_kwh", b.capacity_kwh);
    b.p_max_kw = s.get("p_max_kw", b.p_max_kw);
    if (s.has("p_max_dis_kw")) b.p_max_dis_kw = s.maybe<double>("p_max_dis_kw");
    b.eta_ch = s.get("eta_ch", b.eta_ch);
    b.eta_dis = s.get("eta_dis", b.eta_dis);
    b.soc_min_pct = s.get("soc_min_pct", b.soc_min_pct);
    b.soc_max_pct = s.get("soc_max_pct", b.soc_max_pct);
    cfg.battery_soc_init_pct = s.get("soc_init_pct", cfg.battery_soc_init_pct);
    s.finish();
    try {
        b.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(s.source() + ": section 'battery': " + e.what());
    }
}

void parse_ev(Section s, RunConfig& cfg)
{
    cfg.ev_soc_target_pct = s.get("soc_target_pct", cfg.ev_soc_target_pct);
    if (s.has("sessions")) {
        const json& list = s.take("sessions");
        if (!list.is_array()) s.fail("sessions", "must be an array");
        std::vector<EvSession> sessions;
        for (std::size_t i = 0; i < list.size(); ++i) {
            Section e(list[i], s.field("sessions") + "[" + std::to_string(i) + "]", s.source());
            const int id = e.get("id", static_cast<int>(i));
            const int arrival = e.require<int>("arrival_min");
            const int departure = e.require<int>("departure_min");
            const double capacity = e.get("capacity_kwh", 24.0);
            const double soc_init = e.require<double>("soc_init_pct");
            const double p_max = e.get("p_max_kw", 6.6);
            const double eta = e.get("eta_ch", 0.9);
            const double target = e.get("soc_target_pct", cfg.ev_soc_target_pct);
            e.finish();
            try {
                sessions.push_back(EvSession::make(id, arrival, departure, capacity, soc_init, p_max, eta, target));
            } catch (const ParameterError& err) {
                throw ConfigError(s.source() + ": field '" + s.field("sessions") + "[" + std::to_string(i) +
                                  "]': " + err.what());
            }
        }
        cfg.ev_sessions = std::move(sessions);
    }
    s.finish();
}

void parse_ramp(Section s, RunConfig& cfg)
{
    RampRule r;
    r.kw_per_step = s.maybe<double>("kw_per_step");
    r.percent_of_max_load = s.maybe<double>("percent_of_max_load");
    r.max_load_kw = s.maybe<double>("max_load_kw");
    s.finish();
    if (r.kw_per_step.has_value() == r.percent_of_max_load.has_value()) {
        s.fail("kw_per_step", "or 'ramp.percent_of_max_load' must be given, but not both");
    }
    cfg.ramp = r;
}

void parse_controllers(Section& root, RunConfig& cfg)
{
    const json& list = root.take("controllers");
    if (!list.is_array() || list.empty()) root.fail("controllers", "must be a non-empty array");
    cfg.controllers.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
        Section c(list[i], "controllers[" + std::to_string(i) + "]", root.source());
        ControllerSpec spec;
        const std::string mode = c.require<std::string>("mode");
        try {
            spec.mode = control_mode_from_string(mode);
            spec.allocation_order = allocation_order_from_string(c.get<std::string>("allocation_order", "battery_first"));
        } catch (const ConfigError& e) {
            throw ConfigError(root.source() + ": controllers[" + std::to_string(i) + "]: " + e.what());
        }
        spec.name = c.get("name", mode);
        spec.n = c.get("n", spec.n);
        spec.h = c.maybe<int>("h");
        c.finish();
        cfg.controllers.push_back(spec);
    }
}

void parse_forecaster(Section s, ForecasterSpec& f)
{
    TrainingConfig& t = f.training;
    try {
        t.kind = forecast_kind_from_string(s.get<std::string>("kind", to_string(t.kind)));
    } catch (const ParameterError& e) {
        throw ConfigError(s.source() + ": field 'forecaster.kind': " + e.what());
    }
    t.input_window = s.get("input_window", t.input_window);
    t.horizon = s.get("horizon", t.horizon);
    t.hidden = s.get("hidden", t.hidden);
    t.joint = s.get("joint", t.joint);
    t.anchored = s.get("anchored", t.anchored);
    const std::string opt = s.get<std::string>("optimizer", t.optimizer == Optimizer::adam ? "adam" : "gradient_descent");
    if (opt == "adam") {
        t.optimizer = Optimizer::adam;
    } else if (opt == "gradient_descent") {
        t.optimizer = Optimizer::gradient_descent;
    } else {
        s.fail("optimizer", "must be 'adam' or 'gradient_descent'");
    }
    t.epochs = s.get("epochs", t.epochs);
    t.learning_rate = s.get("learning_rate", t.learning_rate);
    t.batch_size = s.get("batch_size", t.batch_size);
    t.validation_fraction = s.get("validation_fraction", t.validation_fraction);
    t.window_stride = s.get("window_stride", t.window_stride);
    if (s.has("seed")) t.seed = s.require<std::uint64_t>("seed");
    if (s.has("history")) {
        Section h = s.child("history");
        f.history.synthetic_days = h.get("synthetic_days", f.history.synthetic_days);
        if (h.has("seed")) f.history.synthetic_seed = h.require<std::uint64_t>("seed");
        if (auto p = h.maybe<std::string>("pv_csv")) f.history.pv_csv = *p;
        if (auto p = h.maybe<std::string>("load_csv")) f.history.load_csv = *p;
        h.finish();
        if (f.history.pv_csv.has_value() != f.history.load_csv.has_value()) {
            h.fail("pv_csv", "and 'forecaster.history.load_csv' must be given together");
        }
    }
    if (auto m = s.maybe<std::string>("model_file")) f.model_file = *m;
    s.finish();
    for (int w : t.hidden) {
        if (w < 1) throw ConfigError(s.source() + ": field 'forecaster.hidden' widths must be >= 1");
    }
}

void parse_tune(Section s, TuneSpec& t)
{
    t.base = s.maybe<std::string>("base");
    t.candidates = s.get("candidates", t.candidates);
    s.finish();
}

void resolve_paths(RunConfig& cfg, const std::filesystem::path& base)
{
    if (cfg.files) {
        cfg.files->pv_csv = resolve(base, cfg.files->pv_csv.string());
        cfg.files->load_csv = resolve(base, cfg.files->load_csv.string());
        if (cfg.files->ev_csv) cfg.files->ev_csv = resolve(base, cfg.files->ev_csv->string());
    }
    if (cfg.forecaster) {
        auto& h = cfg.forecaster->history;
        if (h.pv_csv) h.pv_csv = resolve(base, h.pv_csv->string());
        if (h.load_csv) h.load_csv = resolve(base, h.load_csv->string());
        if (cfg.forecaster->model_file) cfg.forecaster->model_file = resolve(base, cfg.forecaster->model_file->string());
    }
}

}  // namespace

RunConfig RunConfig::defaults()
{
    RunConfig cfg;
    cfg.synth = SyntheticDayOptions{};
    cfg.ramp.percent_of_max_load = 1.0;

    ForecasterSpec f;
    f.training.horizon = 75;
    f.training.epochs = 40;
    f.training.batch_size = 64;
    f.training.window_stride = 2;
    cfg.forecaster = f;

    cfg.controllers = {
        ControllerSpec{"realtime", ControlMode::realtime, AllocationOrder::battery_first, 5, std::nullopt},
        ControllerSpec{"predictive_ma", ControlMode::predictive_ma, AllocationOrder::battery_first, 50, 75},
        ControllerSpec{"predictive_var", ControlMode::predictive_var, AllocationOrder::battery_first, 5, 75},
    };
    return cfg;
}

RunConfig parse_run_config(const std::string& text, const std::string& source, const std::filesystem::path& base_dir)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ": invalid JSON: " + e.what());
    }
    RunConfig cfg = RunConfig::defaults();
    Section root(j, "", source);
    cfg.seed = root.get("seed", cfg.seed);
    if (root.has("scenario")) parse_scenario(root.child("scenario"), cfg);
    if (root.has("battery")) parse_battery(root.child("battery"), cfg);
    if (root.has("ev")) parse_ev(root.child("ev"), cfg);
    if (root.has("ramp")) parse_ramp(root.child("ramp"), cfg);
    if (root.has("controllers")) parse_controllers(root, cfg);
    if (root.is_null("forecaster")) {
        root.take("forecaster");
        cfg.forecaster.reset();
    } else if (root.has("forecaster")) {
        ForecasterSpec f = cfg.forecaster.value_or(ForecasterSpec{});
        parse_forecaster(root.child("forecaster"), f);
        cfg.forecaster = f;
    }
    if (root.has("tune")) parse_tune(root.child("tune"), cfg.tune);
    if (root.has("output")) {
        Section o = root.child("output");
        cfg.out_dir = o.get<std::string>("dir", cfg.out_dir.string());
        o.finish();
    }
    root.finish();
    resolve_paths(cfg, base_dir);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::string text;
    try {
        text = detail::read_file(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return parse_run_config(text, path.string(), path.parent_path());
}

double effective_ramp_limit(const RunConfig& config)
{
    if (config.ramp.kw_per_step) {
        if (!(*config.ramp.kw_per_step > 0.0)) {
            throw ConfigError("field 'ramp.kw_per_step' must be > 0");
        }
        return *config.ramp.kw_per_step;
    }
    const double percent = config.ramp.percent_of_max_load.value_or(1.0);
    std::optional<double> max_load = config.ramp.max_load_kw;
    if (!max_load && config.synth) max_load = config.synth->max_load_kw;
    if (!max_load) {
        throw ConfigError("field 'ramp.max_load_kw' is required by the percent rule with file inputs");
    }
    // The series step is 1 minute for synthetic days; file inputs are
    // resolved in build_scenario.
    try {
        return ramp_limit_from_percent(percent, *max_load, 1);
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("section 'ramp': ") + e.what());
    }
}

namespace {

Scenario synthetic_scenario(const RunConfig& config, double limit_per_minute)
{
    SyntheticDayOptions o = *config.synth;
    o.battery = config.battery;
    o.battery_initial = BatteryState{config.battery_soc_init_pct};
    o.ev_soc_target_pct = config.ev_soc_target_pct;
    Scenario sc = bundled_scenario(config.seed, o);
    sc.ev_sessions = config.ev_sessions.value_or(default_ev_sessions(config.ev_soc_target_pct));
    sc.ramp_limit_kw_per_step = limit_per_minute;
    return sc;
}

Scenario file_scenario(const RunConfig& config, double limit_per_minute)
{
    const FileInputs& in = *config.files;
    const ColumnMap columns{in.timestamp_column, in.value_column, true};
    Scenario sc{load_csv(in.pv_csv, columns), load_csv(in.load_csv, columns), {}, config.battery,
                BatteryState{config.battery_soc_init_pct}, limit_per_minute};
    if (config.ev_sessions) {
        sc.ev_sessions = *config.ev_sessions;
    } else if (in.ev_csv) {
        sc.ev_sessions = load_ev_csv(*in.ev_csv, config.ev_soc_target_pct);
    }
    // Slope rules are per minute; an absolute per-step limit is taken as given.
    if (!config.ramp.kw_per_step) {
        sc.ramp_limit_kw_per_step = limit_per_minute * sc.step_minutes();
    }
    return sc;
}

}  // namespace

Scenario build_scenario(const RunConfig& config)
{
    if (config.synth.has_value() == config.files.has_value()) {
        throw ConfigError("field 'scenario': exactly one of 'synth' or 'files' is required");
    }
    const double limit_per_minute = effective_ramp_limit(config);
    Scenario sc = config.synth ? synthetic_scenario(config, limit_per_minute) : file_scenario(config, limit_per_minute);
    try {
        sc.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    return sc;
}

std::shared_ptr<const ForecastModel> build_forecaster(const RunConfig& config)
{
    if (!config.forecaster) {
        return nullptr;
    }
    const ForecasterSpec& f = *config.forecaster;
    if (f.model_file) {
        return std::make_shared<const ForecastModel>(load_model(*f.model_file));
    }
    TrainingConfig t = f.training;
    try {
        if (t.kind == ForecastKind::persistence) {
            return std::make_shared<const ForecastModel>(ForecastModel::persistence(t.input_window, t.horizon));
        }
        if (t.kind == ForecastKind::perfect) {
            return std::make_shared<const ForecastModel>(ForecastModel::perfect(t.horizon));
        }
    } catch (const ModelError& e) {
        throw ConfigError(std::string("section 'forecaster': ") + e.what());
    }
    if (f.history.pv_csv) {
        const PowerSeries pv = load_csv(*f.history.pv_csv);
        const PowerSeries load = load_csv(*f.history.load_csv);
        return std::make_shared<const ForecastModel>(fit(pv, load, t));
    }
    if (f.history.synthetic_days < 1) {
        throw ConfigError("field 'forecaster.history.synthetic_days' must be >= 1");
    }
    const std::uint64_t seed = f.history.synthetic_seed.value_or(config.seed + 1000);
    const SyntheticHistory hist =
        synthetic_history(seed, f.history.synthetic_days, config.synth.value_or(SyntheticDayOptions{}));
    try {
        return std::make_shared<const ForecastModel>(fit(hist.pv, hist.load, t));
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("section 'forecaster': ") + e.what());
    }
}

std::vector<ControllerConfig> build_controllers(const RunConfig& config,
                                                const std::shared_ptr<const ForecastModel>& forecaster)
{
    std::vector<ControllerConfig> out;
    for (const auto& spec : config.controllers) {
        ControllerConfig c;
        c.name = spec.name;
        c.mode = spec.mode;
        c.allocation_order = spec.allocation_order;
        c.n = spec.n;
        c.h = spec.h.value_or(forecaster ? forecaster->horizon : c.h);
        if (c.mode != ControlMode::realtime) {
            c.forecaster = forecaster;
        }
        c.validate();
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace nanogrid
