#pragma once

// Minimal numeric CSV support: an optional header line followed by rows of
// comma-separated numbers. Floats are written with 17 significant digits so a
// write/read cycle reproduces every double exactly.

#include <muskat/errors.hpp>
#include <muskat/stepper.hpp>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace muskat::csv {

struct Table {
    std::vector<std::string> header;  // empty when the file has none
    std::vector<std::vector<double>> rows;

    /// Index of a named column, or -1.
    int column(const std::string& name) const {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    }
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && errno != ERANGE;
}

inline Table parse(std::istream& in, const std::string& source) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto cells = split(line);
        std::vector<double> row(cells.size());
        bool numeric = true;
        for (std::size_t i = 0; i < cells.size() && numeric; ++i) numeric = parse_double(cells[i], row[i]);
        if (!numeric) {
            if (t.rows.empty() && t.header.empty()) {
                t.header = cells;
                width = cells.size();
                continue;
            }
            throw DataError(source + ":" + std::to_string(lineno) + ": non-numeric value");
        }
        if (width == 0) width = row.size();
        if (row.size() != width) {
            throw DataError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) +
                            " columns, found " + std::to_string(row.size()));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    return parse(in, path);
}

}  // namespace muskat::csv

namespace muskat {

/// Reads nodal (f, g) from a CSV with columns `f,g` or `x,f,g` (header optional;
/// named columns take precedence when present).
inline State read_state_file(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    int cf = t.column("f");
    int cg = t.column("g");
    if (cf < 0 || cg < 0) {
        const std::size_t width = t.rows.empty() ? t.header.size() : t.rows.front().size();
        if (width == 2) {
            cf = 0;
            cg = 1;
        } else if (width == 3) {
            cf = 1;
            cg = 2;
        } else {
            throw DataError("'" + path + "': expected columns f,g or x,f,g");
        }
    }
    State s;
    for (const auto& row : t.rows) {
        s.f.push_back(row[static_cast<std::size_t>(cf)]);
        s.g.push_back(row[static_cast<std::size_t>(cg)]);
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s.f[i] >= 0.0) || !(s.g[i] >= 0.0)) {
            throw DataError("'" + path + "': negative value at row " + std::to_string(i));
        }
    }
    return s;
}

}  // namespace muskat
