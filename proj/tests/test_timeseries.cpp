#include "nanogrid/errors.hpp"
#include "nanogrid/timeseries.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

using namespace nanogrid;

TEST(PowerSeries, RejectsEmptyAndNonFinite)
{
    EXPECT_THROW(PowerSeries::from_values({}), ValidationError);
    EXPECT_THROW(PowerSeries::from_values({1.0, std::nan("")}), ValidationError);
    EXPECT_THROW(PowerSeries::from_values({1.0}, 0), ParameterError);
}

TEST(PowerSeries, NonnegativeCheckNamesIndex)
{
    const auto s = PowerSeries::from_values({1.0, 2.0, -0.5});
    try {
        s.require_nonnegative("pv");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("2"), std::string::npos) << e.what();
    }
}

TEST(Csv, ReadsThreeRows)
{
    const auto s = parse_csv("timestamp,kw\n0,5.0\n1,6.0\n2,7.0\n");
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.step_minutes(), 1);
    EXPECT_DOUBLE_EQ(s[0], 5.0);
    EXPECT_DOUBLE_EQ(s[2], 7.0);
}

TEST(Csv, InfersStepFromTimestamps)
{
    const auto s = parse_csv("timestamp,kw\n10,1\n15,2\n20,3\n");
    EXPECT_EQ(s.step_minutes(), 5);
    EXPECT_EQ(s.start_time().time_since_epoch().count(), 10);
}

TEST(Csv, NegativeValueIsValidationError)
{
    EXPECT_THROW(parse_csv("timestamp,kw\n0,1.0\n1,-1.0\n"), ValidationError);
    ColumnMap signed_cols;
    signed_cols.nonnegative = false;
    EXPECT_NO_THROW(parse_csv("timestamp,kw\n0,1.0\n1,-1.0\n", signed_cols));
}

TEST(Csv, GapErrorAtIndexTwo)
{
    try {
        parse_csv("timestamp,kw\n0,1\n1,1\n3,1\n", {}, "pv.csv");
        FAIL() << "expected GapError";
    } catch (const GapError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("index 2"), std::string::npos) << msg;
        EXPECT_NE(msg.find("pv.csv"), std::string::npos) << msg;
    }
}

TEST(Csv, NonIncreasingTimestamps)
{
    EXPECT_THROW(parse_csv("timestamp,kw\n5,1\n5,1\n"), GapError);
}

TEST(Csv, MissingColumnIsIngestionError)
{
    EXPECT_THROW(parse_csv("time,kw\n0,1\n"), IngestionError);
    EXPECT_THROW(parse_csv("timestamp,power\n0,1\n"), IngestionError);
}

TEST(Csv, UnparsableCellNamesRowAndColumn)
{
    try {
        parse_csv("timestamp,kw\n0,1\n1,abc\n", {}, "load.csv");
        FAIL() << "expected IngestionError";
    } catch (const IngestionError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
        EXPECT_NE(msg.find("kw"), std::string::npos) << msg;
    }
    EXPECT_THROW(parse_csv("timestamp,kw\nnoon,1\n"), IngestionError);
    EXPECT_THROW(parse_csv("timestamp,kw\n"), IngestionError);
}

TEST(Csv, CustomColumnMap)
{
    ColumnMap cols;
    cols.timestamp = "minute";
    cols.value = "power";
    const auto s = parse_csv("power,minute\n3.5,0\n4.5,1\n", cols);
    EXPECT_DOUBLE_EQ(s[1], 4.5);
    EXPECT_EQ(to_csv(s, cols).substr(0, 13), "minute,power\n");
}

TEST(Csv, IsoTimestampsRoundTrip)
{
    const std::string text = "timestamp,kw\n2024-03-01T00:00,1.000000\n2024-03-01T00:01,2.500000\n";
    const auto s = parse_csv(text);
    EXPECT_EQ(s.timestamp_format(), TimestampFormat::iso8601);
    EXPECT_EQ(to_csv(s), text);
}

TEST(Csv, RoundTripSixDecimals)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 80.0);
    std::vector<double> v(500);
    for (auto& x : v) x = u(rng);
    const auto original = PowerSeries::from_values(v);
    const auto back = parse_csv(to_csv(original));
    ASSERT_EQ(back.size(), original.size());
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(back[i], v[i], 5e-7);
    EXPECT_EQ(to_csv(back), to_csv(original));
}

TEST(Csv, FileRoundTrip)
{
    const auto path = std::filesystem::temp_directory_path() / "nanogrid_ts_roundtrip.csv";
    const auto s = PowerSeries::from_values({1.25, 2.5, 3.75});
    write_csv(s, path);
    EXPECT_EQ(to_csv(load_csv(path)), to_csv(s));
    std::filesystem::remove(path);
    EXPECT_THROW(load_csv(path), DataError);
}

TEST(Resample, PairMeans)
{
    const auto r = resample(PowerSeries::from_values({2, 4, 6, 8}), 2);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_DOUBLE_EQ(r[0], 3.0);
    EXPECT_DOUBLE_EQ(r[1], 7.0);
    EXPECT_EQ(r.step_minutes(), 2);
}

TEST(Resample, IdentityAndPartialWindow)
{
    const auto s = PowerSeries::from_values({2, 4, 6, 8});
    const auto same = resample(s, 1);
    EXPECT_EQ(std::vector<double>(same.values().begin(), same.values().end()), (std::vector<double>{2, 4, 6, 8}));
    const auto r = resample(s, 3);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_DOUBLE_EQ(r[0], 4.0);
    EXPECT_DOUBLE_EQ(r[1], 8.0);
}

TEST(Resample, RejectsNonMultiple)
{
    const auto s = PowerSeries::from_values({1, 2, 3, 4}, 2);
    EXPECT_THROW(resample(s, 3), ParameterError);
    EXPECT_THROW(resample(s, 0), ParameterError);
    EXPECT_NO_THROW(resample(s, 4));
}

TEST(Resample, EnergyWithinOnePartialWindow)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    std::uniform_int_distribution<int> len(1, 300), fac(1, 17);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(static_cast<std::size_t>(len(rng)));
        for (auto& x : v) x = u(rng);
        const int factor = fac(rng);
        const auto in = PowerSeries::from_values(v);
        const auto out = resample(in, factor);
        ASSERT_EQ(out.size(), (v.size() + factor - 1) / factor);
        const double e_in = in.mean() * static_cast<double>(in.size());
        const double e_out = out.mean() * static_cast<double>(out.size()) * factor;
        EXPECT_LE(std::abs(e_in - e_out), factor * in.max() + 1e-9);
    }
}

TEST(SynthPv, ClearDayPeaksAtNoon)
{
    const auto pv = synth_pv_day(80.0, {}, 1);
    ASSERT_EQ(pv.size(), 1440u);
    EXPECT_NEAR(pv.max(), 80.0, 1e-9);
    EXPECT_NEAR(pv[780], 80.0, 1e-9);
    EXPECT_DOUBLE_EQ(pv[0], 0.0);
    EXPECT_DOUBLE_EQ(pv[1439], 0.0);
}

TEST(SynthPv, FullOcclusionIsZero)
{
    const std::vector<CloudEvent> ev{{760, 40, 1.0}};
    PvDayOptions opts;
    opts.edge_ramp_min = 0;
    const auto pv = synth_pv_day(80.0, ev, 1, opts);
    for (int t = 760; t < 800; ++t) EXPECT_DOUBLE_EQ(pv[static_cast<std::size_t>(t)], 0.0) << t;
    EXPECT_GT(pv[759], 70.0);
    EXPECT_GT(pv[800], 70.0);
}

TEST(SynthPv, EdgeRampIsLinear)
{
    const std::vector<CloudEvent> ev{{700, 30, 0.5}};
    PvDayOptions opts;
    opts.edge_ramp_min = 4;
    const auto clear = synth_pv_day(80.0, {}, 1, opts);
    const auto cloudy = synth_pv_day(80.0, ev, 1, opts);
    for (int k = 0; k < 4; ++k) {
        const auto t = static_cast<std::size_t>(700 + k);
        EXPECT_NEAR(cloudy[t], clear[t] * (1.0 - 0.5 * (k + 1) / 4.0), 1e-9);
    }
    EXPECT_NEAR(cloudy[715], clear[715] * 0.5, 1e-9);
}

TEST(SynthPv, DeterministicAndNonnegative)
{
    PvDayOptions opts;
    opts.flicker_fraction = 0.3;
    for (std::uint64_t seed : {1u, 2u, 99u}) {
        const auto events = random_cloud_events(seed, {}, opts);
        const auto a = synth_pv_day(80.0, events, seed, opts);
        const auto b = synth_pv_day(80.0, random_cloud_events(seed, {}, opts), seed, opts);
        EXPECT_EQ(to_csv(a), to_csv(b));
        for (std::size_t t = 0; t < a.size(); ++t) {
            EXPECT_GE(a[t], 0.0);
            if (static_cast<int>(t) <= opts.sunrise_min || static_cast<int>(t) >= opts.sunset_min) {
                EXPECT_DOUBLE_EQ(a[t], 0.0) << t;
            }
        }
    }
}

TEST(SynthPv, RejectsBadEvents)
{
    const std::vector<CloudEvent> overlap{{600, 30, 0.5}, {620, 30, 0.5}};
    EXPECT_THROW(synth_pv_day(80.0, overlap, 1), ParameterError);
    const std::vector<CloudEvent> deep{{600, 30, 1.5}};
    EXPECT_THROW(synth_pv_day(80.0, deep, 1), ParameterError);
    const std::vector<CloudEvent> late{{1430, 30, 0.5}};
    EXPECT_THROW(synth_pv_day(80.0, late, 1), ParameterError);
}

TEST(SynthPv, RandomEventsDoNotOverlap)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto events = random_cloud_events(seed);
        std::sort(events.begin(), events.end(), [](auto& a, auto& b) { return a.start_min < b.start_min; });
        for (std::size_t i = 1; i < events.size(); ++i) {
            EXPECT_GE(events[i].start_min, events[i - 1].start_min + events[i - 1].duration_min);
        }
    }
}

TEST(SynthLoad, StaysWithinBaseAndPeak)
{
    LoadDayOptions opts;
    const auto load = synth_load_day(3, opts);
    ASSERT_EQ(load.size(), 1440u);
    EXPECT_NEAR(load.max(), opts.peak_kw, 1e-6);
    for (double v : load.values()) EXPECT_GE(v, opts.base_kw - 1e-9);
    opts.base_kw = 50.0;
    EXPECT_THROW(synth_load_day(3, opts), ParameterError);
}
