#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stark/oscillatory.hpp"
#include "stark/prufer.hpp"
#include "stark/subordinacy.hpp"

namespace stark::cli {

using Json = nlohmann::ordered_json;

/// "a:b:n" (n points, both ends included) or "v1,v2,...".
std::vector<double> parse_lambda_grid(std::string_view text);

/// 64-bit FNV-1a over the compact dump, printed as 16 hex digits.
std::string config_hash(const Json& canonical);

/// Shortest round-trip text for a double ("nan"/"inf" spelled out).
std::string format_double(double v);

/// Leading comment lines shared by every CSV the tool writes.
std::string csv_preamble(std::string_view kind, std::string_view hash);

Json verdict_json(const SpectralVerdict& v);
Json survey_json(const SurveyReport& report, const Json& config, std::string_view hash);

/// Columns xi, logR, theta, V, b, sigma, gamma.
std::string trajectory_csv(const PruferTrajectory& traj, std::span<const PruferSample> rows, std::string_view hash);
std::string trajectory_csv(const PotentialSpec& q, double lambda, std::span<const PruferSample> rows,
                           std::string_view hash);

/// Columns N, re, im, abs, truncation_error.
std::string tails_csv(const std::vector<OscillatoryTail>& table, std::string_view hash);

Json sset_json(const SSetDiagnostic& d);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  bool log_y = false;
  std::vector<Series> series;
};

/// Static SVG line plot; non-finite points (and non-positive ones on log
/// axes) are dropped.
std::string svg_plot(const PlotSpec& spec);

}  // namespace stark::cli
