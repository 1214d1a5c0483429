#include "nanogrid/target.hpp"

#include "nanogrid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nanogrid {

double realtime_reference(double prev_output_kw, double raw_net_kw, double ramp_limit_kw)
{
    if (!(ramp_limit_kw > 0.0)) {
        throw ParameterError("realtime_reference: ramp_limit_kw must be > 0");
    }
    return std::clamp(raw_net_kw, prev_output_kw - ramp_limit_kw, prev_output_kw + ramp_limit_kw);
}

double moving_average_curve(std::span<const double> net_past, double net_now, std::span<const double> net_fcst, int n)
{
    if (n < 0) {
        throw ParameterError("moving_average_curve: n must be >= 0");
    }
    const std::size_t half = std::min({static_cast<std::size_t>(n), net_past.size(), net_fcst.size()});
    double sum = net_now;
    sum = std::accumulate(net_past.end() - static_cast<std::ptrdiff_t>(half), net_past.end(), sum);
    sum = std::accumulate(net_fcst.begin(), net_fcst.begin() + static_cast<std::ptrdiff_t>(half), sum);
    return sum / static_cast<double>(2 * half + 1);
}

double variance_damping(double pv_now, std::span<const double> pv_fcst)
{
    const double count = static_cast<double>(pv_fcst.size() + 1);
    const double sum = std::accumulate(pv_fcst.begin(), pv_fcst.end(), pv_now);
    if (sum <= kVarianceSumEpsilonKw) {
        return 0.0;
    }
    const double mean = sum / count;
    double sq = (pv_now - mean) * (pv_now - mean);
    for (double v : pv_fcst) {
        sq += (v - mean) * (v - mean);
    }
    const double variance = sq / count;  // population variance
    return std::clamp(1.0 - std::sqrt(variance) / sum, 0.0, 1.0);
}

double variance_curve(double pv_now, double load_now, std::span<const double> pv_fcst)
{
    if (pv_fcst.empty()) {
        throw ParameterError("variance_curve: horizon must be >= 1");
    }
    const double damping = variance_damping(pv_now, pv_fcst);
    return damping * (pv_fcst.back() - pv_now) + pv_now - load_now;
}

TargetCurve clamp_to_ramp(const TargetCurve& curve, double start_kw, double ramp_limit_kw)
{
    if (!(ramp_limit_kw > 0.0)) {
        throw ParameterError("clamp_to_ramp: ramp_limit_kw must be > 0");
    }
    TargetCurve out{curve.kind, {}};
    out.values.reserve(curve.values.size());
    double prev = start_kw;
    for (double v : curve.values) {
        prev = std::clamp(v, prev - ramp_limit_kw, prev + ramp_limit_kw);
        out.values.push_back(prev);
    }
    return out;
}

}  // namespace nanogrid
