#pragma once

// Tabular output: CSV with fixed column order and six significant digits, or
// JSON objects keyed by the same column names. Number formatting goes through
// std::to_chars and is locale-independent.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace shrinkinfo {

using Cell = std::variant<std::string, double, std::uint64_t>;

inline constexpr int significant_digits = 6;

inline std::string format_number(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, significant_digits);
    return std::string(buf, res.ptr);
}

// x rounded to the precision it is printed with.
inline double rounded(double x) {
    if (!std::isfinite(x)) {
        return x;
    }
    const std::string text = format_number(x);
    double value = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), value);
    return value;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

inline std::string cell_text(const Cell& cell) {
    struct Visitor {
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(double d) const { return format_number(d); }
        std::string operator()(std::uint64_t n) const { return std::to_string(n); }
    };
    return std::visit(Visitor{}, cell);
}

inline nlohmann::json cell_json(const Cell& cell) {
    struct Visitor {
        nlohmann::json operator()(const std::string& s) const { return s; }
        nlohmann::json operator()(double d) const {
            // JSON has no NaN/inf literals.
            return std::isfinite(d) ? nlohmann::json(rounded(d)) : nlohmann::json(nullptr);
        }
        nlohmann::json operator()(std::uint64_t n) const { return n; }
    };
    return std::visit(Visitor{}, cell);
}

inline std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out += (c ? "," : "") + table.columns[c];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += (c ? "," : "") + cell_text(row[c]);
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::json to_json(const Table& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            obj[table.columns[c]] = cell_json(row[c]);
        }
        rows.push_back(std::move(obj));
    }
    return nlohmann::json{{"columns", table.columns}, {"rows", std::move(rows)}};
}

enum class OutputFormat { csv, json };

}  // namespace shrinkinfo
