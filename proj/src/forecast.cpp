#include "nanogrid/forecast.hpp"

#include "nanogrid/errors.hpp"
#include "csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace nanogrid {

std::string to_string(ForecastKind kind)
{
    switch (kind) {
    case ForecastKind::persistence: return "persistence";
    case ForecastKind::mlp: return "mlp";
    case ForecastKind::perfect: return "perfect";
    }
    return "unknown";
}

ForecastKind forecast_kind_from_string(const std::string& name)
{
    if (name == "persistence") return ForecastKind::persistence;
    if (name == "mlp") return ForecastKind::mlp;
    if (name == "perfect") return ForecastKind::perfect;
    throw ParameterError("unknown forecaster kind '" + name + "' (expected persistence, mlp or perfect)");
}

// ---------------------------------------------------------------------------
// Network

Eigen::MatrixXd Network::forward(const Eigen::MatrixXd& x) const
{
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::MatrixXd z = layers[l].weights * a;
        z.colwise() += layers[l].bias;
        a = (l + 1 < layers.size()) ? Eigen::MatrixXd(z.array().tanh()) : z;
    }
    return a;
}

Network Network::random(std::span<const int> widths, std::uint64_t seed)
{
    if (widths.size() < 2) {
        throw ParameterError("network needs at least input and output widths");
    }
    std::mt19937_64 rng(seed);
    Network net;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int in = widths[l], out = widths[l + 1];
        if (in < 1 || out < 1) {
            throw ParameterError("network layer widths must be >= 1");
        }
        const double bound = std::sqrt(6.0 / (in + out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Layer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
        for (Eigen::Index r = 0; r < out; ++r) {
            for (Eigen::Index c = 0; c < in; ++c) {
                layer.weights(r, c) = dist(rng);
            }
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

// ---------------------------------------------------------------------------
// Model

ForecastModel ForecastModel::persistence(int input_window, int horizon)
{
    ForecastModel m;
    m.kind = ForecastKind::persistence;
    m.input_window = input_window;
    m.horizon = horizon;
    m.validate();
    return m;
}

ForecastModel ForecastModel::perfect(int horizon)
{
    ForecastModel m;
    m.kind = ForecastKind::perfect;
    m.input_window = 1;
    m.horizon = horizon;
    m.validate();
    return m;
}

void ForecastModel::validate() const
{
    if (input_window < 1 || horizon < 1) {
        throw ModelError("forecast model: input_window and horizon must be >= 1");
    }
    if (kind != ForecastKind::mlp) {
        return;
    }
    const std::size_t expected = joint ? 1 : 2;
    if (networks.size() != expected) {
        throw ModelError("forecast model: expected " + std::to_string(expected) + " network(s)");
    }
    const Eigen::Index in = joint ? 2 * input_window : input_window;
    const Eigen::Index out = joint ? 2 * horizon : horizon;
    for (const auto& net : networks) {
        if (net.layers.empty() || net.inputs() != in || net.outputs() != out) {
            throw ModelError("forecast model: network shape does not match window/horizon");
        }
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            const auto& layer = net.layers[l];
            if (layer.bias.size() != layer.weights.rows() ||
                (l > 0 && layer.weights.cols() != net.layers[l - 1].weights.rows())) {
                throw ModelError("forecast model: layer " + std::to_string(l) + " shape does not chain");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Training

namespace {

// Anchored encoding: differences to the last observation, then the last
// observation's own level.
void encode_window(const MinMax& norm, std::span<const double> win, bool anchored, Eigen::Ref<Eigen::VectorXd> out)
{
    const double last = norm.scale(win.back());
    for (std::size_t j = 0; j < win.size(); ++j) {
        out(static_cast<Eigen::Index>(j)) = anchored ? norm.scale(win[j]) - last : norm.scale(win[j]);
    }
    if (anchored) {
        out(static_cast<Eigen::Index>(win.size() - 1)) = last;
    }
}

struct Dataset {
    Eigen::MatrixXd x;  // features x samples
    Eigen::MatrixXd y;  // targets x samples
};

double mse(const Network& net, const Dataset& d)
{
    if (d.x.cols() == 0) {
        return 0.0;
    }
    return (net.forward(d.x) - d.y).squaredNorm() / static_cast<double>(d.y.size());
}

struct Gradients {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
};

Gradients zeros_like(const Network& net)
{
    Gradients g;
    for (const auto& layer : net.layers) {
        g.w.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
        g.b.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
    }
    return g;
}

Gradients backprop(const Network& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y)
{
    const std::size_t depth = net.layers.size();
    std::vector<Eigen::MatrixXd> activations{x};
    for (std::size_t l = 0; l < depth; ++l) {
        Eigen::MatrixXd z = net.layers[l].weights * activations.back();
        z.colwise() += net.layers[l].bias;
        activations.push_back(l + 1 < depth ? Eigen::MatrixXd(z.array().tanh()) : z);
    }

    Gradients g = zeros_like(net);
    Eigen::MatrixXd delta = 2.0 * (activations.back() - y) / static_cast<double>(y.size());
    for (std::size_t l = depth; l-- > 0;) {
        g.w[l] = delta * activations[l].transpose();
        g.b[l] = delta.rowwise().sum();
        if (l > 0) {
            const auto& a = activations[l];
            delta = (net.layers[l].weights.transpose() * delta).array() * (1.0 - a.array().square());
        }
    }
    return g;
}

void train_network(Network& net, const Dataset& train, const Dataset& val, const TrainingConfig& cfg,
                   std::mt19937_64& rng, std::vector<double>& train_log, std::vector<double>& val_log, int& best_epoch)
{
    const Eigen::Index n = train.x.cols();
    const Eigen::Index batch = (cfg.batch_size <= 0) ? n : std::min<Eigen::Index>(cfg.batch_size, n);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    Gradients m = zeros_like(net), v = zeros_like(net);
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    long step = 0;

    Network best = net;
    double best_val = val.x.cols() > 0 ? mse(net, val) : mse(net, train);
    best_epoch = -1;

    Eigen::MatrixXd xb, yb;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (batch < n) {
            std::shuffle(order.begin(), order.end(), rng);
        }
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index len = std::min(batch, n - start);
            if (len == n) {
                xb = train.x;
                yb = train.y;
            } else {
                xb.resize(train.x.rows(), len);
                yb.resize(train.y.rows(), len);
                for (Eigen::Index k = 0; k < len; ++k) {
                    const auto col = order[static_cast<std::size_t>(start + k)];
                    xb.col(k) = train.x.col(col);
                    yb.col(k) = train.y.col(col);
                }
            }
            const Gradients g = backprop(net, xb, yb);
            ++step;
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                if (cfg.optimizer == Optimizer::gradient_descent) {
                    net.layers[l].weights -= cfg.learning_rate * g.w[l];
                    net.layers[l].bias -= cfg.learning_rate * g.b[l];
                    continue;
                }
                m.w[l] = kBeta1 * m.w[l] + (1 - kBeta1) * g.w[l];
                m.b[l] = kBeta1 * m.b[l] + (1 - kBeta1) * g.b[l];
                v.w[l] = kBeta2 * v.w[l] + (1 - kBeta2) * g.w[l].cwiseAbs2();
                v.b[l] = kBeta2 * v.b[l] + (1 - kBeta2) * g.b[l].cwiseAbs2();
                const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
                net.layers[l].weights.array() -=
                    cfg.learning_rate * (m.w[l].array() / c1) / ((v.w[l].array() / c2).sqrt() + kEps);
                net.layers[l].bias.array() -=
                    cfg.learning_rate * (m.b[l].array() / c1) / ((v.b[l].array() / c2).sqrt() + kEps);
            }
        }
        const double tl = mse(net, train);
        const double vl = val.x.cols() > 0 ? mse(net, val) : tl;
        train_log.push_back(tl);
        val_log.push_back(vl);
        if (vl < best_val) {
            best_val = vl;
            best = net;
            best_epoch = epoch;
        }
    }
    net = std::move(best);
}

}  // namespace

std::size_t required_history(const TrainingConfig& config)
{
    const std::size_t base = static_cast<std::size_t>(config.input_window + config.horizon);
    return config.validation_fraction > 0.0 ? base + 1 : base;
}

ForecastModel fit(const PowerSeries& history_pv, const PowerSeries& history_load, const TrainingConfig& config,
                  TrainingLog* log)
{
    if (config.input_window < 1 || config.horizon < 1) {
        throw ParameterError("forecaster: input_window and horizon must be >= 1");
    }
    if (config.kind == ForecastKind::persistence) {
        return ForecastModel::persistence(config.input_window, config.horizon);
    }
    if (config.kind == ForecastKind::perfect) {
        return ForecastModel::perfect(config.horizon);
    }
    if (!history_pv.aligned_with(history_load)) {
        throw DataError("forecaster: pv and load histories are not aligned");
    }
    if (config.validation_fraction < 0.0 || config.validation_fraction >= 1.0) {
        throw ParameterError("forecaster: validation_fraction must be in [0, 1)");
    }
    if (config.epochs < 1 || !(config.learning_rate > 0.0) || config.window_stride < 1) {
        throw ParameterError("forecaster: epochs, learning_rate and window_stride must be positive");
    }
    const std::size_t need = required_history(config);
    if (history_pv.size() < need) {
        throw DataError("forecaster: history has " + std::to_string(history_pv.size()) +
                        " samples, at least " + std::to_string(need) + " required");
    }

    ForecastModel model;
    model.kind = ForecastKind::mlp;
    model.input_window = config.input_window;
    model.horizon = config.horizon;
    model.joint = config.joint;
    model.anchored = config.anchored;
    const auto pv = history_pv.values();
    const auto load = history_load.values();
    const auto [pv_lo, pv_hi] = std::minmax_element(pv.begin(), pv.end());
    const auto [ld_lo, ld_hi] = std::minmax_element(load.begin(), load.end());
    model.pv_norm = {*pv_lo, *pv_hi};
    model.load_norm = {*ld_lo, *ld_hi};

    const auto w = static_cast<std::size_t>(config.input_window);
    const auto h = static_cast<std::size_t>(config.horizon);
    std::vector<std::size_t> origins;  // index of the current observation
    for (std::size_t t = w - 1; t + h < pv.size(); t += static_cast<std::size_t>(config.window_stride)) {
        origins.push_back(t);
    }
    std::size_t n_val = static_cast<std::size_t>(std::ceil(config.validation_fraction * static_cast<double>(origins.size())));
    if (config.validation_fraction > 0.0) {
        n_val = std::clamp<std::size_t>(n_val, 1, origins.size() - 1);
    }
    const std::size_t n_train = origins.size() - n_val;

    // Builds features/targets for one quantity group; `which` selects PV (0),
    // load (1) or both (-1).
    auto build = [&](int which, std::size_t first, std::size_t count) {
        const Eigen::Index fin = (which < 0 ? 2 : 1) * static_cast<Eigen::Index>(w);
        const Eigen::Index fout = (which < 0 ? 2 : 1) * static_cast<Eigen::Index>(h);
        Dataset d{Eigen::MatrixXd(fin, static_cast<Eigen::Index>(count)),
                  Eigen::MatrixXd(fout, static_cast<Eigen::Index>(count))};
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t t = origins[first + k];
            const auto col = static_cast<Eigen::Index>(k);
            Eigen::Index fi = 0, fo = 0;
            if (which != 1) {
                const double anchor = model.anchored ? model.pv_norm.scale(pv[t]) : 0.0;
                encode_window(model.pv_norm, pv.subspan(t + 1 - w, w), model.anchored,
                              d.x.col(col).segment(fi, w));
                fi += w;
                for (std::size_t j = 1; j <= h; ++j) d.y(fo++, col) = model.pv_norm.scale(pv[t + j]) - anchor;
            }
            if (which != 0) {
                const double anchor = model.anchored ? model.load_norm.scale(load[t]) : 0.0;
                encode_window(model.load_norm, load.subspan(t + 1 - w, w), model.anchored,
                              d.x.col(col).segment(fi, w));
                fi += w;
                for (std::size_t j = 1; j <= h; ++j) d.y(fo++, col) = model.load_norm.scale(load[t + j]) - anchor;
            }
        }
        return d;
    };

    std::mt19937_64 rng(config.seed);
    TrainingLog local;
    const std::vector<int> groups = config.joint ? std::vector<int>{-1} : std::vector<int>{0, 1};
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const int which = groups[gi];
        const Dataset train = build(which, 0, n_train);
        const Dataset val = build(which, n_train, n_val);
        std::vector<int> widths{static_cast<int>(train.x.rows())};
        widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
        widths.push_back(static_cast<int>(train.y.rows()));
        Network net = Network::random(widths, config.seed + 7919 * gi);
        if (config.anchored) {
            // Start from persistence.
            net.layers.back().weights.setZero();
        }

        std::vector<double> tl, vl;
        int best_epoch = -1;
        train_network(net, train, val, config, rng, tl, vl, best_epoch);
        if (local.train_loss.empty()) {
            local.train_loss = tl;
            local.validation_loss = vl;
        } else {
            for (std::size_t e = 0; e < tl.size(); ++e) {
                local.train_loss[e] += tl[e];
                local.validation_loss[e] += vl[e];
            }
        }
        local.best_epoch = std::max(local.best_epoch, best_epoch);
        model.networks.push_back(std::move(net));
    }
    if (log) {
        *log = std::move(local);
    }
    model.validate();
    return model;
}

// ---------------------------------------------------------------------------
// Prediction

std::vector<double> history_window(std::span<const double> series, std::size_t t, int width)
{
    std::vector<double> out(static_cast<std::size_t>(width));
    for (int j = 0; j < width; ++j) {
        const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(t) - (width - 1) + j;
        out[static_cast<std::size_t>(j)] = series[static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, idx))];
    }
    return out;
}

namespace {

double clean(double v)
{
    return std::isfinite(v) ? std::max(0.0, v) : 0.0;
}

std::vector<double> padded_truth(std::span<const double> truth, std::size_t h, double fallback)
{
    std::vector<double> out(h, truth.empty() ? fallback : truth.back());
    std::copy_n(truth.begin(), std::min(h, truth.size()), out.begin());
    return out;
}

}  // namespace

ForecastResult predict(const ForecastModel& model, std::span<const double> recent_pv,
                       std::span<const double> recent_load, std::optional<FutureTruth> future_truth,
                       std::size_t issued_at)
{
    const auto w = static_cast<std::size_t>(model.input_window);
    const auto h = static_cast<std::size_t>(model.horizon);
    if (recent_pv.size() != w || recent_load.size() != w) {
        throw ContractError("predict: history windows must hold exactly " + std::to_string(w) + " samples");
    }
    ForecastResult out;
    out.issued_at = issued_at;

    switch (model.kind) {
    case ForecastKind::persistence:
        out.pv_hat.assign(h, clean(recent_pv.back()));
        out.load_hat.assign(h, clean(recent_load.back()));
        break;
    case ForecastKind::perfect:
        if (!future_truth) {
            throw ContractError("predict: perfect forecaster requires future truth");
        }
        out.pv_hat = padded_truth(future_truth->pv, h, recent_pv.back());
        out.load_hat = padded_truth(future_truth->load, h, recent_load.back());
        break;
    case ForecastKind::mlp: {
        auto run = [&](const Network& net, bool use_pv, bool use_load) {
            Eigen::VectorXd x(net.inputs());
            const auto wi = static_cast<Eigen::Index>(w);
            Eigen::Index i = 0;
            if (use_pv) {
                encode_window(model.pv_norm, recent_pv, model.anchored, x.segment(i, wi));
                i += wi;
            }
            if (use_load) {
                encode_window(model.load_norm, recent_load, model.anchored, x.segment(i, wi));
            }
            return Eigen::VectorXd(net.forward(x));
        };
        const double pv_anchor = model.anchored ? model.pv_norm.scale(recent_pv.back()) : 0.0;
        const double load_anchor = model.anchored ? model.load_norm.scale(recent_load.back()) : 0.0;
        Eigen::VectorXd yp, yl;
        if (model.joint) {
            const Eigen::VectorXd y = run(model.networks.at(0), true, true);
            yp = y.head(static_cast<Eigen::Index>(h));
            yl = y.tail(static_cast<Eigen::Index>(h));
        } else {
            yp = run(model.networks.at(0), true, false);
            yl = run(model.networks.at(1), false, true);
        }
        out.pv_hat.resize(h);
        out.load_hat.resize(h);
        for (std::size_t k = 0; k < h; ++k) {
            const auto i = static_cast<Eigen::Index>(k);
            out.pv_hat[k] = clean(model.pv_norm.unscale(pv_anchor + yp(i)));
            out.load_hat[k] = clean(model.load_norm.unscale(load_anchor + yl(i)));
        }
        break;
    }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

ErrorReport evaluate(const ForecastModel& model, const PowerSeries& test_pv, const PowerSeries& test_load)
{
    if (!test_pv.aligned_with(test_load)) {
        throw DataError("evaluate: pv and load test series are not aligned");
    }
    const auto w = static_cast<std::size_t>(model.input_window);
    const auto h = static_cast<std::size_t>(model.horizon);
    if (test_pv.size() < w + h) {
        throw DataError("evaluate: test series has " + std::to_string(test_pv.size()) + " samples, at least " +
                        std::to_string(w + h) + " required");
    }
    const auto pv = test_pv.values();
    const auto load = test_load.values();

    std::vector<double> abs_pv(h, 0.0), sq_pv(h, 0.0), abs_ld(h, 0.0), sq_ld(h, 0.0);
    std::size_t origins = 0;
    for (std::size_t t = w - 1; t + h < pv.size(); ++t, ++origins) {
        const FutureTruth truth{pv.subspan(t + 1, h), load.subspan(t + 1, h)};
        const auto f = predict(model, pv.subspan(t + 1 - w, w), load.subspan(t + 1 - w, w), truth, t);
        for (std::size_t k = 0; k < h; ++k) {
            const double ep = f.pv_hat[k] - pv[t + 1 + k];
            const double el = f.load_hat[k] - load[t + 1 + k];
            abs_pv[k] += std::abs(ep);
            sq_pv[k] += ep * ep;
            abs_ld[k] += std::abs(el);
            sq_ld[k] += el * el;
        }
    }
    ErrorReport report;
    report.origins = origins;
    const double n = static_cast<double>(origins);
    for (std::size_t k = 0; k < h; ++k) {
        report.leads.push_back(LeadError{static_cast<int>(k + 1), abs_pv[k] / n, std::sqrt(sq_pv[k] / n),
                                         abs_ld[k] / n, std::sqrt(sq_ld[k] / n)});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr const char* kModelFormat = "nanogrid-forecast-model";
constexpr int kModelVersion = 1;

}  // namespace

std::string model_to_json(const ForecastModel& model)
{
    using nlohmann::json;
    json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["kind"] = to_string(model.kind);
    j["input_window"] = model.input_window;
    j["horizon"] = model.horizon;
    j["joint"] = model.joint;
    j["anchored"] = model.anchored;
    j["normalization"] = {{"pv", {model.pv_norm.min, model.pv_norm.max}},
                          {"load", {model.load_norm.min, model.load_norm.max}}};
    json nets = json::array();
    for (const auto& net : model.networks) {
        json layers = json::array();
        for (const auto& layer : net.layers) {
            std::vector<double> w(static_cast<std::size_t>(layer.weights.size()));
            for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
                for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
                    w[static_cast<std::size_t>(r * layer.weights.cols() + c)] = layer.weights(r, c);
                }
            }
            std::vector<double> b(layer.bias.data(), layer.bias.data() + layer.bias.size());
            layers.push_back({{"rows", layer.weights.rows()}, {"cols", layer.weights.cols()}, {"weights", w},
                              {"bias", b}});
        }
        nets.push_back({{"layers", layers}});
    }
    j["networks"] = nets;
    return j.dump(1);
}

ForecastModel model_from_json(const std::string& text)
{
    using nlohmann::json;
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != kModelFormat) {
            throw ModelError("forecast model: unrecognized format tag");
        }
        if (j.at("version").get<int>() != kModelVersion) {
            throw ModelError("forecast model: unsupported version " + std::to_string(j.at("version").get<int>()));
        }
        ForecastModel m;
        m.kind = forecast_kind_from_string(j.at("kind").get<std::string>());
        m.input_window = j.at("input_window").get<int>();
        m.horizon = j.at("horizon").get<int>();
        m.joint = j.at("joint").get<bool>();
        m.anchored = j.at("anchored").get<bool>();
        const auto& norm = j.at("normalization");
        m.pv_norm = {norm.at("pv").at(0).get<double>(), norm.at("pv").at(1).get<double>()};
        m.load_norm = {norm.at("load").at(0).get<double>(), norm.at("load").at(1).get<double>()};
        for (const auto& jn : j.at("networks")) {
            Network net;
            for (const auto& jl : jn.at("layers")) {
                const auto rows = jl.at("rows").get<Eigen::Index>();
                const auto cols = jl.at("cols").get<Eigen::Index>();
                const auto w = jl.at("weights").get<std::vector<double>>();
                const auto b = jl.at("bias").get<std::vector<double>>();
                if (rows < 1 || cols < 1 || static_cast<Eigen::Index>(w.size()) != rows * cols ||
                    static_cast<Eigen::Index>(b.size()) != rows) {
                    throw ModelError("forecast model: layer data does not match its declared shape");
                }
                Network::Layer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
                for (Eigen::Index r = 0; r < rows; ++r) {
                    for (Eigen::Index c = 0; c < cols; ++c) {
                        layer.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
                    }
                    layer.bias(r) = b[static_cast<std::size_t>(r)];
                }
                net.layers.push_back(std::move(layer));
            }
            m.networks.push_back(std::move(net));
        }
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw ModelError(std::string("forecast model: malformed file: ") + e.what());
    } catch (const ParameterError& e) {
        throw ModelError(std::string("forecast model: ") + e.what());
    }
}

void save_model(const ForecastModel& model, const std::filesystem::path& path)
{
    detail::write_file(path, model_to_json(model));
}

ForecastModel load_model(const std::filesystem::path& path)
{
    try {
        return model_from_json(detail::read_file(path));
    } catch (const ModelError& e) {
        throw ModelError(path.string() + ": " + e.what());
    } catch (const DataError& e) {
        throw ModelError(e.what());
    }
}

}  // namespace nanogrid
