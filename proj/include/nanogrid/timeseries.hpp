#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace nanogrid {

using Minutes = std::chrono::minutes;
using Timestamp = std::chrono::sys_time<Minutes>;

/// How timestamps were spelled in the source CSV; written back the same way.
enum class TimestampFormat { integer_minutes, iso8601 };

/// Uniformly sampled power series in kW.
///
/// Immutable once constructed. The constructor enforces the structural
/// invariants (non-empty, finite samples, step >= 1); sign constraints depend
/// on what the series represents and are checked by `require_nonnegative`.
class PowerSeries {
public:
    PowerSeries(Timestamp start, int step_minutes, std::vector<double> values,
                TimestampFormat format = TimestampFormat::integer_minutes);

    /// Series starting at minute 0 with 1-minute steps.
    static PowerSeries from_values(std::vector<double> values, int step_minutes = 1);

    Timestamp start_time() const { return start_; }
    int step_minutes() const { return step_; }
    TimestampFormat timestamp_format() const { return format_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    Timestamp time_at(std::size_t i) const { return start_ + Minutes{step_ * static_cast<std::int64_t>(i)}; }

    double max() const;
    double mean() const;

    /// Throws ValidationError naming `what` and the first offending index.
    void require_nonnegative(const std::string& what) const;

    /// True when start, step and length all match.
    bool aligned_with(const PowerSeries& other) const;

private:
    Timestamp start_;
    int step_;
    std::vector<double> values_;
    TimestampFormat format_;
};

struct ColumnMap {
    std::string timestamp = "timestamp";
    std::string value = "kw";
    /// PV and load series must be >= 0; net series may be signed.
    bool nonnegative = true;
};

PowerSeries load_csv(const std::filesystem::path& path, const ColumnMap& columns = {});
PowerSeries parse_csv(const std::string& text, const ColumnMap& columns = {},
                      const std::string& source = "<memory>");

/// Serialize with a `timestamp,kw` header (column names from `columns`),
/// values with 6 decimal places.
std::string to_csv(const PowerSeries& series, const ColumnMap& columns = {});
void write_csv(const PowerSeries& series, const std::filesystem::path& path, const ColumnMap& columns = {});

/// Block-mean downsampling; the trailing window may be partial.
PowerSeries resample(const PowerSeries& series, int new_step_minutes);

Timestamp parse_timestamp(const std::string& text, TimestampFormat& format_out);
std::string format_timestamp(Timestamp t, TimestampFormat format);

// ---------------------------------------------------------------------------
// Synthetic data

inline constexpr int kMinutesPerDay = 1440;

struct CloudEvent {
    int start_min = 0;
    int duration_min = 0;
    double depth_fraction = 0.0;
};

struct PvDayOptions {
    int sunrise_min = 390;   // 06:30
    int sunset_min = 1170;   // 19:30
    /// Minutes for a cloud edge to go from clear to full depth.
    /// 0 gives an instantaneous edge.
    int edge_ramp_min = 2;
    /// Std-dev of multiplicative per-minute flicker, drawn from `seed`.
    double flicker_fraction = 0.0;
};

/// One day of PV output at 1-minute resolution: a half-cosine clear-sky bell
/// peaking at solar noon, attenuated by (1 - depth) inside cloud events.
PowerSeries synth_pv_day(double clear_sky_peak_kw, std::span<const CloudEvent> cloud_events,
                         std::uint64_t seed, const PvDayOptions& options = {});

struct CloudRegime {
    int count = 12;
    int min_duration_min = 3;
    int max_duration_min = 40;
    double min_depth = 0.2;
    double max_depth = 0.7;
};

/// Non-overlapping random cloud events inside the daylight window.
std::vector<CloudEvent> random_cloud_events(std::uint64_t seed, const CloudRegime& regime = {},
                                            const PvDayOptions& options = {});

struct LoadDayOptions {
    double base_kw = 12.0;
    double peak_kw = 40.0;
    /// Std-dev of additive noise in kW, low-pass filtered so it stays slow.
    double noise_kw = 0.0;
};

/// Commercial-building style load: overnight base, smooth daytime plateau
/// reaching `peak_kw` in the early afternoon.
PowerSeries synth_load_day(std::uint64_t seed, const LoadDayOptions& options = {});

}  // namespace nanogrid
