#include "nanogrid/scenario.hpp"

#include "nanogrid/errors.hpp"
#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace nanogrid {

void Scenario::validate() const
{
    if (!pv.aligned_with(load)) {
        throw ValidationError("scenario: pv and load series differ in start, step or length");
    }
    pv.require_nonnegative("pv");
    load.require_nonnegative("load");
    if (!(ramp_limit_kw_per_step > 0.0) || !std::isfinite(ramp_limit_kw_per_step)) {
        throw ParameterError("scenario: ramp_limit_kw_per_step must be > 0");
    }
    if (horizon_minutes < 1) {
        throw ParameterError("scenario: horizon_minutes must be >= 1");
    }
    battery.validate();
    if (battery_initial.soc_pct < battery.soc_min_pct || battery_initial.soc_pct > battery.soc_max_pct) {
        throw ParameterError("scenario: initial battery SoC outside [soc_min_pct, soc_max_pct]");
    }
}

double ramp_limit_from_percent(double percent, double max_load_kw, int step_minutes)
{
    if (!(percent > 0.0) || !(max_load_kw > 0.0) || step_minutes < 1) {
        throw ParameterError("ramp: percent rule needs percent > 0 and max_load_kw > 0");
    }
    return percent / 100.0 * max_load_kw * step_minutes;
}

std::vector<EvSession> parse_ev_csv(const std::string& text, const std::string& source, double default_target_pct)
{
    const detail::CsvTable table = detail::parse_csv_table(text, source);
    const auto col = [&](const char* name) { return table.column(name, source); };
    const auto optional_col = [&](const std::string& name) -> std::optional<std::size_t> {
        const auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it == table.header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - table.header.begin());
    };
    const std::size_t c_arr = col("arrival_min"), c_dep = col("departure_min"), c_cap = col("capacity_kwh"),
                      c_soc = col("soc_init_pct"), c_pmax = col("p_max_kw"), c_eta = col("eta_ch");
    const auto c_id = optional_col("id");
    const auto c_target = optional_col("soc_target_pct");

    std::vector<EvSession> sessions;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = r + 2;
        const auto num = [&](std::size_t c, const std::string& name) {
            return detail::parse_number(table.cell(row, c, line, name, source), line, name, source);
        };
        const auto integer = [&](std::size_t c, const std::string& name) {
            const double v = num(c, name);
            if (v != std::floor(v)) {
                throw IngestionError(source + ": row " + std::to_string(line) + ", column '" + name +
                                     "': expected a whole number of minutes");
            }
            return static_cast<int>(v);
        };
        const int id = c_id ? integer(*c_id, "id") : static_cast<int>(r);
        const double target = c_target ? num(*c_target, "soc_target_pct") : default_target_pct;
        const std::string where = source + ": row " + std::to_string(line) + ": ";
        try {
            sessions.push_back(EvSession::make(id, integer(c_arr, "arrival_min"), integer(c_dep, "departure_min"),
                                               num(c_cap, "capacity_kwh"), num(c_soc, "soc_init_pct"),
                                               num(c_pmax, "p_max_kw"), num(c_eta, "eta_ch"), target));
        } catch (const InfeasibleError& e) {
            throw InfeasibleError(where + e.what());
        } catch (const ParameterError& e) {
            throw ValidationError(where + e.what());
        }
    }
    return sessions;
}

std::vector<EvSession> load_ev_csv(const std::filesystem::path& path, double default_target_pct)
{
    return parse_ev_csv(detail::read_file(path), path.string(), default_target_pct);
}

std::string ev_csv(const std::vector<EvSession>& sessions)
{
    std::string out = "id,arrival_min,departure_min,capacity_kwh,soc_init_pct,soc_target_pct,p_max_kw,eta_ch\n";
    for (const auto& s : sessions) {
        out += std::to_string(s.id) + "," + std::to_string(s.arrival_min) + "," + std::to_string(s.departure_min) +
               "," + detail::format_fixed(s.capacity_kwh) + "," + detail::format_fixed(s.soc_init_pct) + "," +
               detail::format_fixed(s.soc_target_pct) + "," + detail::format_fixed(s.p_max_kw) + "," +
               detail::format_fixed(s.eta_ch) + "\n";
    }
    return out;
}

}  // namespace nanogrid
