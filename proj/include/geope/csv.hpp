#pragma once

#include <string>
#include <vector>

namespace geope {

/// Shortest decimal form at 17 significant digits; round-trips bit-exactly
/// through strtod.
std::string format_double(double v);

/// Comma-separated, Unix newlines, mandatory header row, no quoting (cells
/// never contain commas). Numeric cells are written by format_double.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void push_row(std::vector<std::string> row);

    /// Cell parsed as double; throws IoError on non-numeric content.
    double cell_double(std::size_t row, std::size_t col) const;

    std::string to_string() const;
};

/// Parses a table written by CsvTable::to_string. Throws IoError on
/// malformed input.
CsvTable parse_csv(const std::string& text);

/// Writes text to path, throwing IoError with the path in the message.
void write_file(const std::string& path, const std::string& text);

std::string read_file(const std::string& path);

} // namespace geope
