#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "epom/common.hpp"

namespace epom {

/// Rectangular table with named columns. Cells are doubles (printed with
/// 17 significant digits so a re-parse reproduces the value exactly),
/// integers, or bare strings. Locale-independent: '.' decimal separator,
/// ',' field separator, no quoting (cell strings must not contain commas).
struct Table {
    using Cell = std::variant<double, long long, std::string>;

    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> cells) {
        if (cells.size() != columns.size())
            throw ConfigError("Table: row width " + std::to_string(cells.size()) +
                              " != " + std::to_string(columns.size()) + " columns");
        rows.push_back(std::move(cells));
    }

    static std::string format_cell(const Cell& c) {
        if (std::holds_alternative<double>(c)) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(c));
            return buf;
        }
        if (std::holds_alternative<long long>(c)) return std::to_string(std::get<long long>(c));
        return std::get<std::string>(c);
    }

    std::string to_csv() const {
        std::string out;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out += ',';
            out += columns[c];
        }
        out += '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out += ',';
                out += format_cell(row[c]);
            }
            out += '\n';
        }
        return out;
    }
};

/// Parse a CSV produced by Table::to_csv. Numeric-looking cells become
/// doubles (integers stay exact up to 2^53), everything else a string.
inline Table parse_csv(const std::string& text) {
    Table t;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    auto split = [](const std::string& s) {
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            const std::size_t pos = s.find(',', start);
            f.push_back(s.substr(start, pos == std::string::npos ? pos : pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        return f;
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            t.columns = split(line);
            header = false;
            continue;
        }
        std::vector<Table::Cell> row;
        for (const auto& f : split(line)) {
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (end && *end == '\0' && end != f.c_str())
                row.emplace_back(v);
            else
                row.emplace_back(f);
        }
        if (row.size() != t.columns.size())
            throw ConfigError("parse_csv: ragged row");
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Write a file atomically: temp file in the same directory, then rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.good()) throw ConfigError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void write_csv(const std::filesystem::path& path, const Table& t) {
    atomic_write(path, t.to_csv());
}

inline Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

}  // namespace epom
