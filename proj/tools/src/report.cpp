#include "stark/cli/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "stark/errors.hpp"
#include "stark/transforms.hpp"
#include "stark/version.hpp"

namespace stark::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw DomainError("cannot parse number '" + text + "'");
  return v;
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

std::vector<double> parse_lambda_grid(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) throw DomainError("empty lambda grid");
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(trim(item));
    if (parts.size() != 3) throw DomainError("lambda grid '" + s + "' must look like a:b:n");
    const double a = parse_number(parts[0]);
    const double b = parse_number(parts[1]);
    const double n = parse_number(parts[2]);
    if (!(n >= 1.0) || n != std::floor(n)) throw DomainError("lambda grid point count must be a positive integer");
    if (n == 1.0) {
      if (a != b) throw DomainError("a one-point lambda grid needs a == b");
      return {a};
    }
    const auto count = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(i + 1 == count ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item)));
  return out;
}

std::string config_hash(const Json& canonical) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_preamble(std::string_view kind, std::string_view hash) {
  std::string out = "# stark ";
  out += kVersion;
  out += " ";
  out += kind;
  out += " config_hash=";
  out += hash;
  out += "\n";
  return out;
}

Json verdict_json(const SpectralVerdict& v) {
  Json j;
  j["lambda"] = v.lambda;
  j["verdict"] = std::string(to_string(v.verdict));
  j["amplitude_bound"] = v.amplitude_bound;
  j["integral6_oscillation"] = v.integral6_oscillation;
  j["integral6_converged"] = v.integral6_converged;
  j["integral6_rate_slope"] = v.integral6_rate_slope;
  j["control_kind"] = v.control_kind;
  j["control_slope"] = v.control_slope;
  j["control_L1_tail"] = v.control_l1_tail;
  j["unreliable_controls"] = v.unreliable_controls;
  j["subordinacy_ratio"] = optional_json(v.subordinacy_ratio);
  j["subordinacy_slope"] = optional_json(v.subordinacy_slope);
  j["wronskian_drift"] = optional_json(v.wronskian_drift);
  j["asymptotic_residual"] = optional_json(v.asymptotic_residual);
  j["f_prime_envelope"] = optional_json(v.f_prime_envelope);
  j["decay_hypothesis"] = v.decay_hypothesis;
  j["smoothness_hypothesis"] = v.smoothness_hypothesis;
  j["accepted_steps"] = v.accepted_steps;
  j["rejected_steps"] = v.rejected_steps;
  j["error"] = v.error.empty() ? Json(nullptr) : Json(v.error);
  return j;
}

Json survey_json(const SurveyReport& report, const Json& config, std::string_view hash) {
  Json j;
  j["toolkit"] = "stark";
  j["version"] = std::string(kVersion);
  j["config_hash"] = std::string(hash);
  j["disclaimer"] = report.disclaimer;
  j["config"] = config;
  Json verdicts = Json::array();
  for (const auto& v : report.verdicts) verdicts.push_back(verdict_json(v));
  j["verdicts"] = verdicts;
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& v : report.verdicts) ++counts[static_cast<int>(v.verdict)];
  j["summary"] = {{"ac_consistent", counts[0]},
                  {"inconclusive", counts[1]},
                  {"resonant", counts[2]},
                  {"failures", report.failures()}};
  return j;
}

std::string trajectory_csv(const PotentialSpec& q, double lambda, std::span<const PruferSample> rows,
                           std::string_view hash) {
  std::string out = csv_preamble("trajectory", hash);
  out += "xi,logR,theta,V,b,sigma,gamma\n";
  for (const auto& s : rows) {
    const double sigma = 2.0 * s.xi - s.v_integral - s.lambda_cos_integral;
    const double gamma = 2.0 * s.theta - sigma;
    const double cols[] = {s.xi, s.log_r, s.theta, effective_potential(q, s.xi, lambda), b_term(q, s.xi), sigma,
                           gamma};
    for (std::size_t i = 0; i < 7; ++i) {
      if (i) out += ',';
      out += format_double(cols[i]);
    }
    out += '\n';
  }
  return out;
}

std::string trajectory_csv(const PruferTrajectory& traj, std::span<const PruferSample> rows, std::string_view hash) {
  return trajectory_csv(traj.potential(), traj.lambda(), rows, hash);
}

std::string tails_csv(const std::vector<OscillatoryTail>& table, std::string_view hash) {
  std::string out = csv_preamble("tails", hash);
  if (!table.empty()) out += "# fitted_exponent=" + format_double(table.front().fitted_exponent) + "\n";
  out += "N,re,im,abs,truncation_error\n";
  for (const auto& t : table) {
    out += format_double(t.n) + "," + format_double(t.value.real()) + "," + format_double(t.value.imag()) + "," +
           format_double(std::abs(t.value)) + "," + format_double(t.truncation_error) + "\n";
  }
  return out;
}

Json sset_json(const SSetDiagnostic& d) {
  Json j;
  j["N"] = d.n;
  j["phi_re"] = d.phi_value.real();
  j["phi_im"] = d.phi_value.imag();
  j["mplus_estimate"] = d.mplus_estimate;
  j["h_grid"] = d.h_grid;
  j["window_averages"] = d.averages;
  j["panels"] = d.panels;
  return j;
}

// SVG ------------------------------------------------------------------------------

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 50;

const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::string svg_plot(const PlotSpec& spec) {
  auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
  };
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x1 >= x0)) {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return kTop + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  out += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  out += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         escape(spec.title) + "</text>\n";
  out += "<rect x=\"" + fixed(kLeft) + "\" y=\"" + fixed(kTop) + "\" width=\"" + fixed(pw) + "\" height=\"" +
         fixed(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0;
    const double fy = y0 + (y1 - y0) * k / 4.0;
    const double gx = kLeft + pw * k / 4.0;
    const double gy = kTop + ph - ph * k / 4.0;
    out += "<text x=\"" + fixed(gx) + "\" y=\"" + fixed(kTop + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           tick_label(spec.log_x ? std::pow(10.0, fx) : fx) + "</text>\n";
    out += "<text x=\"" + fixed(kLeft - 6) + "\" y=\"" + fixed(gy + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           tick_label(spec.log_y ? std::pow(10.0, fy) : fy) + "</text>\n";
  }
  out += "<text x=\"" + fixed(kLeft + pw / 2) + "\" y=\"" + fixed(kHeight - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(spec.x_label) +
         "</text>\n";
  out += "<text transform=\"translate(16," + fixed(kTop + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         escape(spec.y_label) + "</text>\n";
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* colour = kColours[k % std::size(kColours)];
    std::string points;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      points += fixed(px(s.x[i])) + "," + fixed(py(s.y[i])) + " ";
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.2\" points=\"" + points +
           "\"/>\n";
    out += "<text x=\"" + fixed(kLeft + 8) + "\" y=\"" + fixed(kTop + 16 + 14.0 * k) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + colour + "\">" + escape(s.label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace stark::cli
