#pragma once

// Minimal CSV helpers shared by the ingestion and report writers.
// Unquoted, comma separated, header row required.

#include <filesystem>
#include <string>
#include <vector>

namespace nanogrid::detail {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; IngestionError when absent.
    std::size_t column(const std::string& name, const std::string& source) const;
    const std::string& cell(const std::vector<std::string>& row, std::size_t col, std::size_t line,
                            const std::string& name, const std::string& source) const;
};

std::string trim(const std::string& s);
CsvTable parse_csv_table(const std::string& text, const std::string& source);
double parse_number(const std::string& cell, std::size_t line, const std::string& column, const std::string& source);

/// Fixed 6-decimal rendering; negative zero is normalized.
std::string format_fixed(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace nanogrid::detail
