#pragma once

#include <span>
#include <string>
#include <vector>

namespace nanogrid {

enum class TargetKind { realtime, moving_average, variance };

/// Reference net-output trajectory P_ref, one value per scenario step.
struct TargetCurve {
    TargetKind kind = TargetKind::realtime;
    std::vector<double> values;
};

/// Below this PV window sum (kW) the variance damping is taken as 0.
inline constexpr double kVarianceSumEpsilonKw = 1e-6;

/// Clamps the raw net power into prev_output +/- ramp_limit.
double realtime_reference(double prev_output_kw, double raw_net_kw, double ramp_limit_kw);

/// Centered moving average of net power: up to `n` past samples, the current
/// sample and the first `n` forecast samples. The half-width shrinks to what
/// both sides can supply, so the window stays symmetric.
double moving_average_curve(std::span<const double> net_past, double net_now, std::span<const double> net_fcst,
                            int n);

/// Damping factor 1 - std/sum over the window {pv_now, pv_fcst...}, held to [0, 1].
double variance_damping(double pv_now, std::span<const double> pv_fcst);

/// Variance-damped forecast following: the target moves from the current net
/// power toward the PV change forecast at the end of the horizon, scaled by
/// variance_damping. The horizon is pv_fcst.size().
double variance_curve(double pv_now, double load_now, std::span<const double> pv_fcst);

/// Forward pass holding every step within +/- ramp_limit of its predecessor,
/// starting from `start_kw`.
TargetCurve clamp_to_ramp(const TargetCurve& curve, double start_kw, double ramp_limit_kw);

}  // namespace nanogrid
