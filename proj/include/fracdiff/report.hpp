#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "estimates.hpp"

namespace fracdiff {

nlohmann::json to_json(const EstimateReport& r);
nlohmann::json to_json(const ConstantUse& c);
/// Inverse of to_json for the fields the CSV and the exit status depend on.
EstimateReport report_from_json(const nlohmann::json& j);

/// Shortest round-trip decimal form, so reports are byte-stable.
std::string format_double(double v);

/// Header plus one row per report: name, lhs, rhs, margin, pass, then context columns.
std::string csv_header();
std::string csv_row(const std::string& run, const EstimateReport& r);

struct PlotSeries {
    std::string label;
    std::string color;
    std::vector<double> x, y;
    bool dashed = false;
    bool markers = false;
};

struct PlotSpec {
    std::string title, xlabel, ylabel;
    bool logx = false, logy = false;
    std::vector<PlotSeries> series;
    std::vector<std::pair<double, std::string>> vlines;   ///< x position, label
};

/// Self-contained SVG line plot. Nonpositive values are dropped on log axes.
std::string render_svg(const PlotSpec& spec);

/// Writes text to path, creating parent directories; throws std::runtime_error on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace fracdiff
