#pragma once

#include "nanogrid/timeseries.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nanogrid {

enum class ForecastKind { persistence, mlp, perfect };

std::string to_string(ForecastKind kind);
ForecastKind forecast_kind_from_string(const std::string& name);

/// Fully connected feedforward network: tanh hidden layers, linear output.
struct Network {
    struct Layer {
        Eigen::MatrixXd weights;  // out x in
        Eigen::VectorXd bias;
    };
    std::vector<Layer> layers;

    Eigen::Index inputs() const { return layers.front().weights.cols(); }
    Eigen::Index outputs() const { return layers.back().weights.rows(); }

    /// Forward pass over a batch stored column-wise (in x batch).
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

    /// Xavier-uniform initialization, zero biases.
    static Network random(std::span<const int> widths, std::uint64_t seed);
};

/// Min-max scaling to [0, 1]; a zero range maps to offset-only scaling.
struct MinMax {
    double min = 0.0;
    double max = 1.0;

    double range() const { return max > min ? max - min : 1.0; }
    double scale(double v) const { return (v - min) / range(); }
    double unscale(double v) const { return v * range() + min; }
};

struct ForecastModel {
    ForecastKind kind = ForecastKind::persistence;
    int input_window = 30;
    int horizon = 15;
    /// One network over both histories (2w -> 2h) or one per quantity (w -> h).
    bool joint = true;
    /// Network outputs are changes relative to the last observation
    /// (in normalized units) rather than absolute levels.
    bool anchored = true;
    std::vector<Network> networks;
    MinMax pv_norm;
    MinMax load_norm;

    static ForecastModel persistence(int input_window, int horizon);
    static ForecastModel perfect(int horizon);

    /// Throws ModelError when shapes do not chain from the windows to the horizon.
    void validate() const;
};

struct ForecastResult {
    std::vector<double> pv_hat;
    std::vector<double> load_hat;
    std::size_t issued_at = 0;
};

enum class Optimizer { adam, gradient_descent };

struct TrainingConfig {
    ForecastKind kind = ForecastKind::mlp;
    int input_window = 30;
    int horizon = 15;
    std::vector<int> hidden{32, 32};
    bool joint = true;
    bool anchored = true;
    Optimizer optimizer = Optimizer::adam;
    int epochs = 40;
    double learning_rate = 1e-3;
    /// 0 means full batch.
    int batch_size = 32;
    double validation_fraction = 0.2;
    /// Take every k-th sliding window as a training sample.
    int window_stride = 1;
    std::uint64_t seed = 1;
};

struct TrainingLog {
    std::vector<double> train_loss;       // per epoch, normalized MSE
    std::vector<double> validation_loss;  // per epoch, normalized MSE
    int best_epoch = -1;
};

/// Smallest history length `fit` accepts for this config.
std::size_t required_history(const TrainingConfig& config);

ForecastModel fit(const PowerSeries& history_pv, const PowerSeries& history_load, const TrainingConfig& config,
                  TrainingLog* log = nullptr);

/// Future observations, used only by the perfect-foresight kind.
struct FutureTruth {
    std::span<const double> pv;
    std::span<const double> load;
};

/// `recent_pv`/`recent_load` hold exactly input_window samples, oldest first,
/// ending at the current observation.
ForecastResult predict(const ForecastModel& model, std::span<const double> recent_pv,
                       std::span<const double> recent_load, std::optional<FutureTruth> future_truth = std::nullopt,
                       std::size_t issued_at = 0);

/// Input window ending at `t`, padded with the first sample before the start.
std::vector<double> history_window(std::span<const double> series, std::size_t t, int width);

struct LeadError {
    int lead = 0;
    double mae_pv = 0.0;
    double rmse_pv = 0.0;
    double mae_load = 0.0;
    double rmse_load = 0.0;
};

struct ErrorReport {
    std::vector<LeadError> leads;
    std::size_t origins = 0;
};

/// Rolling-origin evaluation over every origin with a full window behind it
/// and a full horizon ahead.
ErrorReport evaluate(const ForecastModel& model, const PowerSeries& test_pv, const PowerSeries& test_load);

std::string model_to_json(const ForecastModel& model);
ForecastModel model_from_json(const std::string& text);
void save_model(const ForecastModel& model, const std::filesystem::path& path);
ForecastModel load_model(const std::filesystem::path& path);

}  // namespace nanogrid
