/**
 * @file io.hpp
 *
 * CSV point clouds (header c0..c{k-1}, one point per row) with a JSON
 * sidecar `<file>.json` holding {"metric", "dedup_tol"}, and numeric CSV
 * loss matrices.
 */
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "arc/metric.hpp"
#include "arc/rademacher.hpp"

namespace arc {

/// Shortest decimal text that round-trips a double.
inline std::string format_double(double x) {
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::stod(buf) == x) break;
    }
    return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
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

inline double parse_cell(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw std::invalid_argument(where + ": '" + s + "' is not a number");
    return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        lines.push_back(line);
    }
    return lines;
}

}  // namespace detail

/// Rows of a point CSV with its c0..c{k-1} header checked. Repeated rows
/// are kept.
inline std::vector<Vector> read_point_rows(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw std::invalid_argument(path + ": empty file");
    const auto header = detail::split_csv_line(lines.front());
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] != "c" + std::to_string(k))
            throw std::invalid_argument(path + ": header column " + std::to_string(k) + " must be 'c" + std::to_string(k) +
                                        "', found '" + header[k] + "'");
    std::vector<Vector> rows;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = detail::split_csv_line(lines[r]);
        if (cells.size() != header.size())
            throw std::invalid_argument(path + ":" + std::to_string(r + 1) + ": expected " + std::to_string(header.size()) +
                                        " columns, found " + std::to_string(cells.size()));
        Vector v;
        for (const auto& c : cells) v.push_back(detail::parse_cell(c, path + ":" + std::to_string(r + 1)));
        rows.push_back(std::move(v));
    }
    if (rows.empty()) throw std::invalid_argument(path + ": no points");
    return rows;
}

inline std::string sidecar_path(const std::string& csv) { return csv + ".json"; }

/// Loads a point cloud. Metric and tolerance come from the sidecar if it
/// exists (linf and 0 otherwise); `metric_override` wins over both.
inline PointCloud read_point_cloud(const std::string& path, std::optional<Metric> metric_override = std::nullopt) {
    Metric metric = Metric::Linf;
    double tol = 0.0;
    if (std::filesystem::exists(sidecar_path(path))) {
        std::ifstream in(sidecar_path(path));
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(sidecar_path(path) + ": " + e.what());
        }
        if (j.contains("metric")) metric = parse_metric(j.at("metric").get<std::string>());
        if (j.contains("dedup_tol")) tol = j.at("dedup_tol").get<double>();
    }
    if (metric_override) metric = *metric_override;
    return PointCloud(read_point_rows(path), metric, tol);
}

inline void write_point_cloud(const std::string& path, const PointCloud& c) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    for (std::size_t k = 0; k < c.dim(); ++k) out << (k ? "," : "") << 'c' << k;
    out << '\n';
    for (const auto& p : c) {
        for (std::size_t k = 0; k < p.size(); ++k) out << (k ? "," : "") << format_double(p[k]);
        out << '\n';
    }
    std::ofstream side(sidecar_path(path));
    side << nlohmann::json{{"metric", std::string(to_string(c.metric()))}, {"dedup_tol", c.dedup_tol()}}.dump() << '\n';
}

/// Numeric CSV, one hypothesis per row; a non-numeric first row is taken
/// as a header and skipped. The range is taken from the data.
inline LossMatrix read_loss_matrix(const std::string& path) {
    auto lines = detail::read_lines(path);
    if (lines.empty()) throw std::invalid_argument(path + ": empty file");
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < lines.size(); ++r) {
        const auto cells = detail::split_csv_line(lines[r]);
        std::vector<double> row;
        try {
            for (const auto& c : cells) row.push_back(detail::parse_cell(c, path + ":" + std::to_string(r + 1)));
        } catch (const std::invalid_argument&) {
            if (r == 0) continue;
            throw;
        }
        rows.push_back(std::move(row));
    }
    return LossMatrix::from_rows(rows);
}

}  // namespace arc
