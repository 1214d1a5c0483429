#include "csv.hpp"

#include "nanogrid/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nanogrid::detail {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

namespace {

std::vector<std::string> split_row(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        cells.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

}  // namespace

CsvTable parse_csv_table(const std::string& text, const std::string& source)
{
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        auto cells = split_row(line);
        if (!have_header) {
            table.header = std::move(cells);
            have_header = true;
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) {
        throw IngestionError(source + ": missing header row");
    }
    return table;
}

std::size_t CsvTable::column(const std::string& name, const std::string& source) const
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw IngestionError(source + ": missing column '" + name + "'");
}

const std::string& CsvTable::cell(const std::vector<std::string>& row, std::size_t col, std::size_t line,
                                  const std::string& name, const std::string& source) const
{
    if (col >= row.size() || row[col].empty()) {
        throw IngestionError(source + ": row " + std::to_string(line) + ", column '" + name + "': missing value");
    }
    return row[col];
}

double parse_number(const std::string& cell, std::size_t line, const std::string& column, const std::string& source)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != cell.size() || used == 0 || !std::isfinite(v)) {
        throw IngestionError(source + ": row " + std::to_string(line) + ", column '" + column +
                             "': unparsable number '" + cell + "'");
    }
    return v;
}

std::string format_fixed(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s = buf;
    if (s == "-0.000000") {
        s = "0.000000";
    }
    return s;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestionError(path.string() + ": cannot open file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError(path.string() + ": cannot open for writing");
    }
    out << contents;
    if (!out) {
        throw DataError(path.string() + ": write failed");
    }
}

}  // namespace nanogrid::detail
