#include "stark/potentials.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "stark/errors.hpp"

namespace stark {
namespace {

constexpr double kHalfPi = 1.5707963267948966;

double weierstrass_value(double alpha, int terms, double x) {
  double sum = 0.0;
  double freq = 1.0;
  for (int k = 0; k <= terms; ++k) {
    sum += std::pow(2.0, -(alpha + 1.0) * k) * std::sin(freq * x);
    freq *= 2.0;
  }
  return sum;
}

double weierstrass_derivative(double alpha, int terms, double x) {
  double sum = 0.0;
  double freq = 1.0;
  for (int k = 0; k <= terms; ++k) {
    sum += std::pow(2.0, -alpha * k) * std::cos(freq * x);
    freq *= 2.0;
  }
  return sum;
}

double tabulated_value(const std::vector<TabulatedPoint>& s, double x) {
  if (x < s.front().x || x > s.back().x) {
    throw RangeError("tabulated potential: x=" + std::to_string(x) + " outside [" +
                     std::to_string(s.front().x) + ", " + std::to_string(s.back().x) + "]");
  }
  auto it = std::upper_bound(s.begin(), s.end(), x,
                             [](double v, const TabulatedPoint& p) { return v < p.x; });
  if (it == s.end()) return s.back().q;
  if (it == s.begin()) return s.front().q;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (x - lo.x) / (hi.x - lo.x);
  return lo.q + t * (hi.q - lo.q);
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw DomainError("potential parameter '" + key + "' is not a number: '" + text + "'");
  }
  return value;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::zero: return "zero";
    case Family::power_law: return "power_law";
    case Family::resonant: return "resonant";
    case Family::weierstrass_smooth: return "weierstrass_smooth";
    case Family::tabulated: return "tabulated";
  }
  return "unknown";
}

PotentialSpec PotentialSpec::zero() { return PotentialSpec{}; }

PotentialSpec PotentialSpec::power_law(double amplitude, double beta) {
  if (!std::isfinite(amplitude) || !std::isfinite(beta) || beta < 0.0) {
    throw DomainError("power_law needs finite A and beta >= 0");
  }
  PotentialSpec s;
  s.family = Family::power_law;
  s.amplitude = amplitude;
  s.decay_exponent = beta;
  return s;
}

PotentialSpec PotentialSpec::resonant(double amplitude, double phase, double decay) {
  if (!std::isfinite(amplitude) || !std::isfinite(phase) || !std::isfinite(decay) || decay < 0.0) {
    throw DomainError("resonant needs finite A, phase and decay >= 0");
  }
  PotentialSpec s;
  s.family = Family::resonant;
  s.amplitude = amplitude;
  s.resonant_phase = phase;
  s.resonant_decay = decay;
  return s;
}

PotentialSpec PotentialSpec::weierstrass_smooth(double alpha, int terms) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("weierstrass_smooth needs alpha in (0, 1]");
  if (terms < 1) throw DomainError("weierstrass_smooth needs a positive term count K");
  PotentialSpec s;
  s.family = Family::weierstrass_smooth;
  s.holder_alpha = alpha;
  s.term_count = terms;
  return s;
}

PotentialSpec PotentialSpec::tabulated(std::vector<TabulatedPoint> samples) {
  if (samples.size() < 2) throw DomainError("tabulated potential needs at least two samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i].x) || !std::isfinite(samples[i].q)) {
      throw DomainError("tabulated potential has non-finite entries");
    }
    if (i > 0 && !(samples[i].x > samples[i - 1].x)) {
      throw DomainError("tabulated grid must be strictly increasing in x");
    }
  }
  if (samples.front().x < 0.0) throw DomainError("tabulated grid must lie in x >= 0");
  PotentialSpec s;
  s.family = Family::tabulated;
  s.samples = std::move(samples);
  return s;
}

bool PotentialSpec::decay_hypothesis() const {
  switch (family) {
    case Family::zero: return true;
    case Family::power_law: return decay_exponent > 1.0 / 3.0;
    case Family::resonant: return resonant_decay > 1.0 / 3.0;
    case Family::weierstrass_smooth:
    case Family::tabulated: return false;
  }
  return false;
}

bool PotentialSpec::smoothness_hypothesis() const {
  return family == Family::zero || family == Family::weierstrass_smooth;
}

double eval(const PotentialSpec& spec, double x) {
  if (!(x >= 0.0)) throw DomainError("potential evaluated at negative x");
  switch (spec.family) {
    case Family::zero: return 0.0;
    case Family::power_law: return spec.amplitude * std::pow(1.0 + x, -spec.decay_exponent);
    case Family::resonant: {
      const double phase = (4.0 / 3.0) * x * std::sqrt(x) + spec.resonant_phase;
      return spec.amplitude * std::pow(1.0 + x, -spec.resonant_decay) * std::sin(phase);
    }
    case Family::weierstrass_smooth:
      return weierstrass_value(spec.holder_alpha, spec.term_count, x);
    case Family::tabulated: return tabulated_value(spec.samples, x);
  }
  return 0.0;
}

double eval_derivative(const PotentialSpec& spec, double x, std::optional<double> fd_step) {
  if (!(x >= 0.0)) throw DomainError("potential derivative evaluated at negative x");
  switch (spec.family) {
    case Family::zero: return 0.0;
    case Family::power_law:
      return -spec.decay_exponent * spec.amplitude * std::pow(1.0 + x, -spec.decay_exponent - 1.0);
    case Family::resonant: {
      const double root = std::sqrt(x);
      const double phase = (4.0 / 3.0) * x * root + spec.resonant_phase;
      const double env = std::pow(1.0 + x, -spec.resonant_decay);
      return spec.amplitude * env *
             (-spec.resonant_decay / (1.0 + x) * std::sin(phase) + 2.0 * root * std::cos(phase));
    }
    case Family::weierstrass_smooth:
      return weierstrass_derivative(spec.holder_alpha, spec.term_count, x);
    case Family::tabulated: {
      if (!fd_step || !(*fd_step > 0.0)) {
        throw DomainError("tabulated potential derivative needs a positive finite-difference step");
      }
      const double h = *fd_step;
      const double lo = std::max(spec.samples.front().x, x - h);
      const double hi = std::min(spec.samples.back().x, x + h);
      if (!(hi > lo)) throw RangeError("finite-difference stencil collapsed");
      return (tabulated_value(spec.samples, hi) - tabulated_value(spec.samples, lo)) / (hi - lo);
    }
  }
  return 0.0;
}

double max_wavenumber(const PotentialSpec& spec) {
  return spec.family == Family::weierstrass_smooth ? std::ldexp(1.0, spec.term_count) : 0.0;
}

std::vector<double> derivative_jumps(const PotentialSpec& spec, double lo, double hi) {
  std::vector<double> out;
  if (spec.family != Family::tabulated) return out;
  for (const auto& p : spec.samples) {
    if (p.x > lo && p.x < hi) out.push_back(p.x);
  }
  return out;
}

WeierstrassBounds weierstrass_bounds(double alpha, int terms) {
  WeierstrassBounds b{0.0, 0.0};
  for (int k = 0; k <= terms; ++k) {
    b.sup_q += std::pow(2.0, -(alpha + 1.0) * k);
    b.sup_derivative += std::pow(2.0, -alpha * k);
  }
  return b;
}

DecayCheck verify_decay(const PotentialSpec& spec, double beta, std::span<const double> grid) {
  if (grid.empty()) throw DomainError("verify_decay needs a nonempty grid");
  const double x_max = *std::max_element(grid.begin(), grid.end());
  const double last_decade = (1.0 + x_max) / 10.0 - 1.0;
  double best = 0.0;
  double before = 0.0;
  double within = 0.0;
  bool has_before = false;
  for (double x : grid) {
    const double envelope = std::abs(eval(spec, x)) * std::pow(1.0 + x, beta);
    if (!std::isfinite(envelope)) return {false, std::numeric_limits<double>::infinity()};
    best = std::max(best, envelope);
    if (x < last_decade) {
      before = std::max(before, envelope);
      has_before = true;
    } else {
      within = std::max(within, envelope);
    }
  }
  // Too short a grid to have a last decade: stability is only finiteness.
  const bool stable = !has_before || within <= before * (1.0 + 1e-9) + 1e-300;
  return {stable, best};
}

double verify_holder(const PotentialSpec& spec, double alpha, std::span<const double> grid,
                     std::span<const double> h_grid) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("Hölder exponent must lie in (0, 1]");
  std::optional<double> fd;
  if (spec.family == Family::tabulated) {
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < spec.samples.size(); ++i) {
      min_gap = std::min(min_gap, spec.samples[i].x - spec.samples[i - 1].x);
    }
    fd = 0.5 * min_gap;
  }
  double constant = 0.0;
  for (double h : h_grid) {
    if (!(h > 0.0 && h <= 1.0)) throw DomainError("Hölder increments must lie in (0, 1]");
    const double scale = std::pow(h, alpha);
    for (double x : grid) {
      const double diff = eval_derivative(spec, x + h, fd) - eval_derivative(spec, x, fd);
      constant = std::max(constant, std::abs(diff) / scale);
    }
  }
  return constant;
}

std::vector<PresetInfo> presets() {
  return {
      {"zero", "", "q(x) = 0"},
      {"power_law", "A=1,beta=0.5", "q(x) = A (1+x)^(-beta)"},
      {"resonant", "A=1,phi=1.5707963267948966,decay=0.5",
       "q(x) = A (1+x)^(-decay) sin((4/3) x^(3/2) + phi)"},
      {"weierstrass_smooth", "alpha=0.5,K=8", "q(x) = sum_{k<=K} 2^(-(alpha+1)k) sin(2^k x)"},
      {"tabulated", "file=<path.csv>", "linear interpolation of (x, q) samples"},
  };
}

PotentialSpec make_potential(std::string_view name, const std::map<std::string, std::string>& params) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : parse_double(key, it->second);
  };
  auto reject_unknown = [&](std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : params) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw DomainError("unknown parameter '" + key + "' for potential '" + std::string(name) + "'");
      }
    }
  };
  if (name == "zero") {
    reject_unknown({});
    return PotentialSpec::zero();
  }
  if (name == "power_law") {
    reject_unknown({"A", "beta"});
    return PotentialSpec::power_law(get("A", 1.0), get("beta", 0.5));
  }
  if (name == "resonant") {
    reject_unknown({"A", "phi", "decay"});
    return PotentialSpec::resonant(get("A", 1.0), get("phi", kHalfPi), get("decay", 0.5));
  }
  if (name == "weierstrass_smooth") {
    reject_unknown({"alpha", "K"});
    const double k = get("K", 8.0);
    if (k != std::floor(k)) throw DomainError("weierstrass_smooth K must be an integer");
    return PotentialSpec::weierstrass_smooth(get("alpha", 0.5), static_cast<int>(k));
  }
  if (name == "tabulated") {
    reject_unknown({"file"});
    auto it = params.find("file");
    if (it == params.end()) throw DomainError("tabulated potential needs file=<path.csv>");
    return PotentialSpec::tabulated(load_tabulated_csv(it->second));
  }
  throw DomainError("unknown potential preset '" + std::string(name) + "'");
}

PotentialSpec parse_potential(std::string_view text) {
  const std::string s = trim(text);
  const auto brace = s.find('{');
  if (brace == std::string::npos) return make_potential(s, {});
  if (s.back() != '}') throw DomainError("potential spec '" + s + "' is missing a closing brace");
  const std::string name = trim(std::string_view(s).substr(0, brace));
  const std::string body = s.substr(brace + 1, s.size() - brace - 2);
  std::map<std::string, std::string> params;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw DomainError("potential parameter '" + item + "' lacks '='");
    params[trim(std::string_view(item).substr(0, eq))] = trim(std::string_view(item).substr(eq + 1));
  }
  return make_potential(name, params);
}

std::string describe(const PotentialSpec& spec) {
  switch (spec.family) {
    case Family::zero: return "zero";
    case Family::power_law:
      return "power_law{A=" + format_number(spec.amplitude) +
             ",beta=" + format_number(spec.decay_exponent) + "}";
    case Family::resonant:
      return "resonant{A=" + format_number(spec.amplitude) + ",phi=" + format_number(spec.resonant_phase) +
             ",decay=" + format_number(spec.resonant_decay) + "}";
    case Family::weierstrass_smooth:
      return "weierstrass_smooth{alpha=" + format_number(spec.holder_alpha) +
             ",K=" + std::to_string(spec.term_count) + "}";
    case Family::tabulated:
      return "tabulated{n=" + std::to_string(spec.samples.size()) + "}";
  }
  return "unknown";
}

std::vector<TabulatedPoint> load_tabulated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open tabulated potential file '" + path + "'");
  std::vector<TabulatedPoint> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto sep = t.find_first_of(",; \t");
    if (sep == std::string::npos) throw DomainError("tabulated CSV line has one column: '" + t + "'");
    const std::string a = trim(std::string_view(t).substr(0, sep));
    const std::string b = trim(std::string_view(t).substr(sep + 1));
    double x = 0.0;
    double q = 0.0;
    const auto rx = std::from_chars(a.data(), a.data() + a.size(), x);
    const auto rq = std::from_chars(b.data(), b.data() + b.size(), q);
    const bool numeric = rx.ec == std::errc() && rq.ec == std::errc() && rx.ptr == a.data() + a.size() &&
                         rq.ptr == b.data() + b.size();
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw DomainError("tabulated CSV line is not numeric: '" + t + "'");
    }
    first = false;
    out.push_back({x, q});
  }
  return out;
}

}  // namespace stark
