#include "mabm/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace mabm {

std::string format_double(double value) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, end);
}

void write_comment_header(std::ostream& out, std::string_view header) {
    std::size_t start = 0;
    while (start < header.size()) {
        auto stop = header.find('\n', start);
        if (stop == std::string_view::npos) stop = header.size();
        out << "# " << header.substr(start, stop - start) << '\n';
        start = stop + 1;
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream stream(line);
    while (std::getline(stream, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw std::out_of_range("csv: no column named '" + std::string(name) + "'");
}

std::vector<double> CsvTable::numeric_column(std::string_view name) const {
    const std::size_t idx = column(name);
    std::vector<double> values;
    values.reserve(rows.size());
    for (const auto& row : rows) {
        if (idx >= row.size() || row[idx].empty()) continue;
        const std::string& cell = row[idx];
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc{} || ptr != cell.data() + cell.size())
            throw std::runtime_error("csv: non-numeric value '" + cell + "' in column '" +
                                     std::string(name) + "'");
        values.push_back(v);
    }
    return values;
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!have_header) {
            table.columns = split_line(line);
            have_header = true;
        } else {
            table.rows.push_back(split_line(line));
        }
    }
    if (!have_header) throw std::runtime_error("csv: missing header row");
    return table;
}

}  // namespace mabm
