#include "nanogrid/timeseries.hpp"

#include "nanogrid/errors.hpp"
#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace nanogrid {

PowerSeries::PowerSeries(Timestamp start, int step_minutes, std::vector<double> values, TimestampFormat format)
    : start_(start), step_(step_minutes), values_(std::move(values)), format_(format)
{
    if (step_ < 1) {
        throw ParameterError("PowerSeries: step_minutes must be >= 1, got " + std::to_string(step_));
    }
    if (values_.empty()) {
        throw ValidationError("PowerSeries: series is empty");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw ValidationError("PowerSeries: non-finite sample at index " + std::to_string(i));
        }
    }
}

PowerSeries PowerSeries::from_values(std::vector<double> values, int step_minutes)
{
    return PowerSeries(Timestamp{Minutes{0}}, step_minutes, std::move(values));
}

double PowerSeries::max() const
{
    return *std::max_element(values_.begin(), values_.end());
}

double PowerSeries::mean() const
{
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

void PowerSeries::require_nonnegative(const std::string& what) const
{
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] < 0.0) {
            std::ostringstream msg;
            msg << what << ": negative sample " << values_[i] << " kW at index " << i;
            throw ValidationError(msg.str());
        }
    }
}

bool PowerSeries::aligned_with(const PowerSeries& other) const
{
    return start_ == other.start_ && step_ == other.step_ && values_.size() == other.values_.size();
}

// ---------------------------------------------------------------------------
// Timestamps

Timestamp parse_timestamp(const std::string& raw, TimestampFormat& format_out)
{
    const std::string text = detail::trim(raw);
    if (text.empty()) {
        throw IngestionError("empty timestamp");
    }
    const bool all_digits = std::all_of(text.begin() + (text[0] == '-' ? 1 : 0), text.end(),
                                        [](unsigned char c) { return std::isdigit(c) != 0; });
    if (all_digits && text != "-") {
        format_out = TimestampFormat::integer_minutes;
        return Timestamp{Minutes{std::stoll(text)}};
    }

    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0;
    int consumed = 0;
    const int n = std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &consumed);
    if (n < 6 || (sep != 'T' && sep != ' ')) {
        throw IngestionError("unparsable timestamp '" + text + "'");
    }
    std::string rest = text.substr(static_cast<std::size_t>(consumed));
    if (!rest.empty() && rest[0] == ':') {
        int more = 0;
        if (std::sscanf(rest.c_str(), ":%2d%n", &s, &more) != 1) {
            throw IngestionError("unparsable timestamp '" + text + "'");
        }
        rest = rest.substr(static_cast<std::size_t>(more));
        if (s != 0) {
            throw IngestionError("sub-minute timestamp '" + text + "' is not supported");
        }
    }
    if (!rest.empty() && rest != "Z") {
        throw IngestionError("unsupported timestamp suffix in '" + text + "'");
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59) {
        throw IngestionError("invalid calendar timestamp '" + text + "'");
    }
    format_out = TimestampFormat::iso8601;
    return time_point_cast<Minutes>(sys_days{ymd}) + hours{h} + Minutes{mi};
}

std::string format_timestamp(Timestamp t, TimestampFormat format)
{
    if (format == TimestampFormat::integer_minutes) {
        return std::to_string(t.time_since_epoch().count());
    }
    using namespace std::chrono;
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const auto minute_of_day = (t - day_point).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(minute_of_day / 60), static_cast<long long>(minute_of_day % 60));
    return buf;
}

// ---------------------------------------------------------------------------
// CSV

PowerSeries parse_csv(const std::string& text, const ColumnMap& columns, const std::string& source)
{
    const detail::CsvTable table = detail::parse_csv_table(text, source);
    const std::size_t ts_col = table.column(columns.timestamp, source);
    const std::size_t kw_col = table.column(columns.value, source);

    std::vector<Timestamp> stamps;
    std::vector<double> values;
    stamps.reserve(table.rows.size());
    values.reserve(table.rows.size());
    TimestampFormat format = TimestampFormat::integer_minutes;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = r + 2;  // 1-based, after header
        TimestampFormat row_format{};
        try {
            stamps.push_back(parse_timestamp(table.cell(row, ts_col, line, columns.timestamp, source), row_format));
        } catch (const IngestionError& e) {
            throw IngestionError(source + ": row " + std::to_string(line) + ", column '" + columns.timestamp +
                                 "': " + e.what());
        }
        if (r == 0) {
            format = row_format;
        }
        values.push_back(detail::parse_number(table.cell(row, kw_col, line, columns.value, source), line,
                                              columns.value, source));
    }
    if (values.empty()) {
        throw IngestionError(source + ": no data rows");
    }

    int step = 1;
    if (stamps.size() >= 2) {
        const auto first = (stamps[1] - stamps[0]).count();
        if (first <= 0) {
            throw GapError(source + ": timestamps not strictly increasing at index 1");
        }
        step = static_cast<int>(first);
        for (std::size_t i = 2; i < stamps.size(); ++i) {
            const auto delta = (stamps[i] - stamps[i - 1]).count();
            if (delta != first) {
                std::ostringstream msg;
                msg << source << ": non-uniform timestamps, first gap at index " << i << " ("
                    << format_timestamp(stamps[i - 1], format) << " -> " << format_timestamp(stamps[i], format)
                    << ", expected step " << first << " min)";
                throw GapError(msg.str());
            }
        }
    }

    PowerSeries series(stamps.front(), step, std::move(values), format);
    if (columns.nonnegative) {
        series.require_nonnegative(source);
    }
    return series;
}

PowerSeries load_csv(const std::filesystem::path& path, const ColumnMap& columns)
{
    return parse_csv(detail::read_file(path), columns, path.string());
}

std::string to_csv(const PowerSeries& series, const ColumnMap& columns)
{
    std::string out = columns.timestamp + "," + columns.value + "\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += format_timestamp(series.time_at(i), series.timestamp_format());
        out += ',';
        out += detail::format_fixed(series[i]);
        out += '\n';
    }
    return out;
}

void write_csv(const PowerSeries& series, const std::filesystem::path& path, const ColumnMap& columns)
{
    detail::write_file(path, to_csv(series, columns));
}

PowerSeries resample(const PowerSeries& series, int new_step_minutes)
{
    if (new_step_minutes < 1 || new_step_minutes % series.step_minutes() != 0) {
        throw ParameterError("resample: new step " + std::to_string(new_step_minutes) +
                             " min is not a positive multiple of " + std::to_string(series.step_minutes()) + " min");
    }
    const auto factor = static_cast<std::size_t>(new_step_minutes / series.step_minutes());
    const auto in = series.values();
    std::vector<double> out;
    out.reserve((in.size() + factor - 1) / factor);
    for (std::size_t i = 0; i < in.size(); i += factor) {
        const std::size_t end = std::min(in.size(), i + factor);
        out.push_back(std::accumulate(in.begin() + static_cast<std::ptrdiff_t>(i),
                                      in.begin() + static_cast<std::ptrdiff_t>(end), 0.0) /
                      static_cast<double>(end - i));
    }
    return PowerSeries(series.start_time(), new_step_minutes, std::move(out), series.timestamp_format());
}

// ---------------------------------------------------------------------------
// Synthetic generators

namespace {

// Attenuation profile of one event at minute t: 0 outside, 1 on the plateau,
// linear on the edges.
double event_shape(const CloudEvent& ev, int edge, int t)
{
    const int end = ev.start_min + ev.duration_min;
    if (t < ev.start_min || t >= end) {
        return 0.0;
    }
    if (edge <= 0) {
        return 1.0;
    }
    const double rise = static_cast<double>(t - ev.start_min + 1) / edge;
    const double fall = static_cast<double>(end - t) / edge;
    return std::clamp(std::min(rise, fall), 0.0, 1.0);
}

}  // namespace

PowerSeries synth_pv_day(double clear_sky_peak_kw, std::span<const CloudEvent> cloud_events, std::uint64_t seed,
                         const PvDayOptions& options)
{
    if (clear_sky_peak_kw < 0.0) {
        throw ParameterError("synth_pv_day: clear_sky_peak_kw must be >= 0");
    }
    if (options.sunrise_min < 0 || options.sunset_min > kMinutesPerDay || options.sunrise_min >= options.sunset_min) {
        throw ParameterError("synth_pv_day: invalid daylight window");
    }
    std::vector<CloudEvent> events(cloud_events.begin(), cloud_events.end());
    for (const auto& ev : events) {
        if (ev.depth_fraction < 0.0 || ev.depth_fraction > 1.0) {
            throw ParameterError("synth_pv_day: depth_fraction must be in [0,1]");
        }
        if (ev.start_min < 0 || ev.duration_min < 1 || ev.start_min + ev.duration_min > kMinutesPerDay) {
            throw ParameterError("synth_pv_day: cloud event outside the 1440-minute day");
        }
    }
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.start_min < b.start_min; });
    for (std::size_t i = 1; i < events.size(); ++i) {
        if (events[i].start_min < events[i - 1].start_min + events[i - 1].duration_min) {
            throw ParameterError("synth_pv_day: overlapping cloud events at minute " +
                                 std::to_string(events[i].start_min));
        }
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> flicker(0.0, 1.0);
    const double daylight = options.sunset_min - options.sunrise_min;
    std::vector<double> values(kMinutesPerDay, 0.0);
    for (int t = 0; t < kMinutesPerDay; ++t) {
        // Draw unconditionally so the noise stream does not depend on the window.
        const double noise = flicker(rng);
        if (t <= options.sunrise_min || t >= options.sunset_min) {
            continue;
        }
        double pv = clear_sky_peak_kw * std::sin(std::numbers::pi * (t - options.sunrise_min) / daylight);
        double attenuation = 0.0;
        for (const auto& ev : events) {
            attenuation = std::max(attenuation, ev.depth_fraction * event_shape(ev, options.edge_ramp_min, t));
        }
        pv *= (1.0 - attenuation);
        if (options.flicker_fraction > 0.0) {
            pv *= std::max(0.0, 1.0 + options.flicker_fraction * noise);
        }
        values[static_cast<std::size_t>(t)] = std::max(0.0, pv);
    }
    return PowerSeries(Timestamp{Minutes{0}}, 1, std::move(values));
}

std::vector<CloudEvent> random_cloud_events(std::uint64_t seed, const CloudRegime& regime, const PvDayOptions& options)
{
    if (regime.min_duration_min < 1 || regime.max_duration_min < regime.min_duration_min ||
        regime.min_depth < 0.0 || regime.max_depth > 1.0 || regime.max_depth < regime.min_depth) {
        throw ParameterError("random_cloud_events: invalid regime");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> start_dist(options.sunrise_min + 30, options.sunset_min - 30 - regime.max_duration_min);
    std::uniform_int_distribution<int> dur_dist(regime.min_duration_min, regime.max_duration_min);
    std::uniform_real_distribution<double> depth_dist(regime.min_depth, regime.max_depth);

    std::vector<CloudEvent> events;
    // Rejection sampling with a minimum clear gap between events.
    constexpr int kGap = 10;
    for (int attempt = 0; attempt < 200 * std::max(1, regime.count) && static_cast<int>(events.size()) < regime.count;
         ++attempt) {
        CloudEvent ev{start_dist(rng), dur_dist(rng), depth_dist(rng)};
        const bool clash = std::any_of(events.begin(), events.end(), [&](const CloudEvent& o) {
            return ev.start_min < o.start_min + o.duration_min + kGap && o.start_min < ev.start_min + ev.duration_min + kGap;
        });
        if (!clash) {
            events.push_back(ev);
        }
    }
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.start_min < b.start_min; });
    return events;
}

PowerSeries synth_load_day(std::uint64_t seed, const LoadDayOptions& options)
{
    if (options.base_kw < 0.0 || options.peak_kw < options.base_kw) {
        throw ParameterError("synth_load_day: need 0 <= base_kw <= peak_kw");
    }
    constexpr double kRiseStart = 420, kRiseEnd = 780, kFallStart = 900, kFallEnd = 1200;
    const auto raised_cosine = [](double x) { return 0.5 - 0.5 * std::cos(std::numbers::pi * x); };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // First-order low-pass on the noise with a ~30 minute time constant.
    constexpr double kAlpha = 1.0 / 30.0;
    const double noise_scale = options.noise_kw / std::sqrt(kAlpha / (2.0 - kAlpha));
    double filtered = 0.0;

    std::vector<double> values(kMinutesPerDay);
    for (int t = 0; t < kMinutesPerDay; ++t) {
        double shape = 0.0;
        if (t >= kRiseStart && t < kRiseEnd) {
            shape = raised_cosine((t - kRiseStart) / (kRiseEnd - kRiseStart));
        } else if (t >= kRiseEnd && t < kFallStart) {
            shape = 1.0;
        } else if (t >= kFallStart && t < kFallEnd) {
            shape = 1.0 - raised_cosine((t - kFallStart) / (kFallEnd - kFallStart));
        }
        filtered += kAlpha * (gauss(rng) - filtered);
        const double load = options.base_kw + (options.peak_kw - options.base_kw) * shape + noise_scale * filtered;
        values[static_cast<std::size_t>(t)] = std::clamp(load, 0.0, options.peak_kw);
    }
    return PowerSeries(Timestamp{Minutes{0}}, 1, std::move(values));
}

}  // namespace nanogrid
