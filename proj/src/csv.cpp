#include "geope/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "geope/errors.hpp"

namespace geope {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void CsvTable::push_row(std::vector<std::string> row) {
    if (row.size() != header.size()) throw IoError("csv: row width does not match header");
    rows.push_back(std::move(row));
}

double CsvTable::cell_double(std::size_t row, std::size_t col) const {
    const std::string& cell = rows.at(row).at(col);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0') {
        throw IoError("csv: non-numeric cell '" + cell + "'");
    }
    return v;
}

std::string CsvTable::to_string() const {
    std::string out;
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("csv: missing header row");

    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);

    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::stringstream rs(line);
        while (std::getline(rs, cell, ',')) row.push_back(cell);
        if (row.size() != table.header.size()) {
            throw IoError("csv: row width mismatch at line " + std::to_string(lineno));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace geope
