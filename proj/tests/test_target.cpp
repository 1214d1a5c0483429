#include "nanogrid/errors.hpp"
#include "nanogrid/metrics.hpp"
#include "nanogrid/target.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace nanogrid;

TEST(Realtime, ClampsIntoRampBand)
{
    EXPECT_NEAR(realtime_reference(10.0, 12.0, 0.2), 10.2, 1e-12);
    EXPECT_NEAR(realtime_reference(10.0, 9.0, 0.4), 9.6, 1e-12);
    EXPECT_DOUBLE_EQ(realtime_reference(10.0, 10.3, 0.4), 10.3);
    EXPECT_NEAR(realtime_reference(10.0, 20.0, 0.4), 10.4, 1e-12);
    EXPECT_THROW(realtime_reference(0.0, 1.0, 0.0), ParameterError);
}

TEST(MovingAverage, ZeroHalfWindowIsCurrentSample)
{
    const std::vector<double> past{1.0, 2.0};
    const std::vector<double> fcst{9.0, 9.0};
    EXPECT_DOUBLE_EQ(moving_average_curve(past, 4.0, fcst, 0), 4.0);
}

TEST(MovingAverage, HandExample)
{
    const std::vector<double> past{0.0};
    const std::vector<double> fcst{6.0};
    EXPECT_DOUBLE_EQ(moving_average_curve(past, 3.0, fcst, 1), 3.0);
}

TEST(MovingAverage, ShrinksSymmetrically)
{
    // Only one past sample: half-width 1 even though n = 3.
    const std::vector<double> past{2.0};
    const std::vector<double> fcst{4.0, 100.0, 100.0};
    EXPECT_DOUBLE_EQ(moving_average_curve(past, 3.0, fcst, 3), 3.0);
    EXPECT_DOUBLE_EQ(moving_average_curve({}, 3.0, fcst, 3), 3.0);
    EXPECT_THROW(moving_average_curve(past, 3.0, fcst, -1), ParameterError);
}

TEST(MovingAverage, PerfectForecastsMatchWholeSeriesCenteredAverage)
{
    std::mt19937_64 rng(17);
    std::normal_distribution<double> step(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> s(240);
        double x = 0.0;
        for (auto& v : s) v = (x += step(rng));
        const int n = trial % 13;
        const std::size_t h = 5 + static_cast<std::size_t>(trial % 20);
        for (std::size_t t = 0; t < s.size(); ++t) {
            const std::span<const double> all(s);
            const std::size_t ahead = std::min(h, s.size() - 1 - t);
            const double got = moving_average_curve(all.first(t), s[t], all.subspan(t + 1, ahead), n);
            EXPECT_NEAR(got, oracle::centered_average(s, t, n, h), 1e-9);
        }
    }
}

TEST(Variance, ConstantForecastFollowsForecast)
{
    const std::vector<double> fcst(5, 30.0);
    EXPECT_DOUBLE_EQ(variance_damping(30.0, fcst), 1.0);
    EXPECT_DOUBLE_EQ(variance_curve(30.0, 12.0, fcst), 30.0 - 12.0);
}

TEST(Variance, NightIsMinusLoad)
{
    const std::vector<double> fcst(10, 0.0);
    EXPECT_DOUBLE_EQ(variance_damping(0.0, fcst), 0.0);
    EXPECT_DOUBLE_EQ(variance_curve(0.0, 7.0, fcst), -7.0);
}

TEST(Variance, HandExample)
{
    const std::vector<double> fcst{10.0, 40.0};
    const double d = variance_damping(40.0, fcst);
    EXPECT_NEAR(d, 1.0 - std::sqrt(200.0) / 90.0, 1e-12);
    EXPECT_NEAR(d, 0.8429, 1e-4);
    EXPECT_NEAR(variance_curve(40.0, 5.0, fcst), 35.0, 1e-12);
}

TEST(Variance, DampingScalesForecastChange)
{
    const std::vector<double> fcst{30.0, 20.0, 10.0};
    const std::vector<double> window{40.0, 30.0, 20.0, 10.0};
    const double d = 1.0 - std::sqrt(oracle::population_variance(window)) / 100.0;
    EXPECT_NEAR(variance_curve(40.0, 5.0, fcst), d * (10.0 - 40.0) + 40.0 - 5.0, 1e-12);
    EXPECT_THROW(variance_curve(1.0, 1.0, {}), ParameterError);
}

TEST(Variance, DampingAlwaysInUnitInterval)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t h = 1 + static_cast<std::size_t>(u(rng) * 60);
        std::vector<double> fcst(h);
        // Mix of spiky and tiny windows to reach the clamp from both sides.
        for (auto& v : fcst) v = u(rng) < 0.1 ? 80.0 * u(rng) : 1e-7 * u(rng);
        const double now = u(rng) < 0.5 ? 0.0 : 80.0 * u(rng);
        const double d = variance_damping(now, fcst);
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 1.0);
    }
}

TEST(Clamp, StaircaseFromStep)
{
    TargetCurve c{TargetKind::moving_average, std::vector<double>(30, 10.0)};
    const auto out = clamp_to_ramp(c, 0.0, 0.4);
    for (std::size_t i = 0; i < 25; ++i) EXPECT_NEAR(out.values[i], 0.4 * static_cast<double>(i + 1), 1e-9);
    for (std::size_t i = 25; i < 30; ++i) EXPECT_DOUBLE_EQ(out.values[i], 10.0);
    EXPECT_EQ(out.kind, TargetKind::moving_average);
    EXPECT_THROW(clamp_to_ramp(c, 0.0, -1.0), ParameterError);
}

TEST(Clamp, SmoothCurveUnchangedAndIdempotent)
{
    TargetCurve smooth{TargetKind::realtime, {1.0, 1.3, 1.5, 1.2, 0.9}};
    EXPECT_EQ(clamp_to_ramp(smooth, 1.0, 0.4).values, smooth.values);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        TargetCurve c;
        c.values.resize(100);
        for (auto& v : c.values) v = u(rng);
        const auto once = clamp_to_ramp(c, 0.0, 0.4);
        EXPECT_EQ(clamp_to_ramp(once, 0.0, 0.4).values, once.values);
    }
}

TEST(Clamp, OutputNeverViolates)
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-80.0, 80.0), lim(0.01, 5.0);
    for (int trial = 0; trial < 500; ++trial) {
        TargetCurve c;
        c.values.resize(300);
        for (auto& v : c.values) v = u(rng);
        const double limit = lim(rng);
        const double start = u(rng);
        const auto out = clamp_to_ramp(c, start, limit);
        double prev = start;
        for (double v : out.values) {
            ASSERT_LE(std::abs(v - prev), limit + 1e-9);
            prev = v;
        }
        EXPECT_DOUBLE_EQ(violation(out.values, limit).total_kw, 0.0);
    }
}
