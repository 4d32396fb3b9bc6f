#include "stark/oscillatory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "stark/errors.hpp"
#include "stark/fit.hpp"
#include "stark/quadrature.hpp"
#include "stark/transforms.hpp"

namespace stark {
namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kMaxIncrement = kPi / 2.0;

// Integral of amp(x) exp(i phase(x)) over [a, b] on Filon panels whose phase
// increment stays below pi/2. `max_width(x)` bounds the panel for amplitude
// resolution.
template <class Amp, class Phase, class Slope, class Width>
std::complex<double> phase_resolved(Amp&& amp, Phase&& phase, Slope&& slope, Width&& max_width, double a,
                                    double b, bool allow_flat = false) {
  std::complex<double> sum{};
  if (!(b > a)) return sum;
  const double s0 = slope(a);
  auto check = [&](double x, double s) {
    if (allow_flat) return;
    if (!(std::abs(s) > 1e-12) || (s > 0.0) != (s0 > 0.0)) {
      throw StationaryPhaseError("phase derivative vanishes near xi=" + std::to_string(x));
    }
  };
  check(a, s0);
  double x = a;
  while (x < b) {
    const double s = slope(x);
    check(x, s);
    double w = std::min(max_width(x), b - x);
    if (std::abs(s) > 0.0) w = std::min(w, kMaxIncrement / std::abs(s));
    double right = x + w;
    if (b - right <= 1e-12 * std::abs(b)) right = b;
    const double mid = 0.5 * (x + right);
    const double sm = slope(mid);
    check(mid, sm);
    sum += quad::filon_panel([&](double t) { return quad::OscillatorySample{amp(t), phase(t)}; }, x, right,
                             sm);
    x = right;
  }
  check(b, slope(b));
  return sum;
}

void fill_fitted_exponent(std::vector<OscillatoryTail>& table) {
  std::vector<double> ns;
  std::vector<double> mags;
  for (const auto& t : table) {
    ns.push_back(t.n);
    mags.push_back(std::abs(t.value));
  }
  const double slope = fit_loglog(ns, mags).slope;
  for (auto& t : table) t.fitted_exponent = slope;
}

// |dq/dx| for the panel policies; tabulated potentials use a one-sided
// difference inside the sample range.
double q_slope(const PotentialSpec& q, double x) {
  if (q.family != Family::tabulated) return std::abs(eval_derivative(q, x));
  const double hi = q.samples.back().x;
  const double h = 1e-7 * (1.0 + std::abs(x));
  if (x + h <= hi) return std::abs(eval(q, x + h) - eval(q, x)) / h;
  return std::abs(eval(q, x) - eval(q, x - h)) / h;
}

// Sum of the 12-point panel weights against Legendre moments: the Filon
// panel rule written as sum_i value_i g_i.
std::array<std::complex<double>, quad::detail::kFilonNodes> filon_weights(double kappa) {
  constexpr std::size_t n = quad::detail::kFilonNodes;
  const quad::GaussRule& rule = quad::gauss_rule(n);
  std::array<std::complex<double>, n> moments{};
  quad::legendre_exponential_moments(kappa, moments);
  std::array<std::complex<double>, n> g{};
  std::array<double, n> legendre{};
  for (std::size_t i = 0; i < n; ++i) {
    quad::detail::legendre_values(rule.nodes[i], legendre);
    std::complex<double> acc{};
    for (std::size_t k = 0; k < n; ++k) acc += (k + 0.5) * legendre[k] * moments[k];
    g[i] = rule.weights[i] * acc;
  }
  return g;
}

}  // namespace

// PhaseSpec ---------------------------------------------------------------------

double PhaseSpec::value(double xi) const {
  double h = linear_coeff * xi + cubic_root_coeff * std::cbrt(xi);
  if (perturbation) h += perturbation(xi);
  return h;
}

double PhaseSpec::slope(double xi) const {
  double s = linear_coeff + cubic_root_coeff / (3.0 * std::cbrt(xi * xi));
  if (perturbation_derivative) s += perturbation_derivative(xi);
  return s;
}

bool verify_perturbation_bound(const PhaseSpec& phase, std::span<const double> grid) {
  if (!phase.perturbation_derivative) return true;
  for (double xi : grid) {
    if (!(xi > 0.0)) throw DomainError("perturbation bound needs xi > 0");
    if (std::abs(phase.perturbation_derivative(xi)) * std::cbrt(xi * xi) > phase.derivative_bound * (1.0 + 1e-12)) {
      return false;
    }
  }
  return true;
}

// Power-weight tails ---------------------------------------------------------

OscillatoryTail tail_power_phase(double p, const PhaseSpec& phase, double n, double xi_max) {
  if (!(p <= 0.0)) throw DomainError("tail_power_phase needs p <= 0");
  if (!(n >= 1.0)) throw DomainError("tail_power_phase needs N >= 1");
  if (!(xi_max >= 100.0 * n * (1.0 - 1e-12))) throw DomainError("tail_power_phase needs Xi >= 100 N");
  OscillatoryTail tail;
  tail.n = n;
  tail.value = phase_resolved([p](double x) { return std::complex<double>(std::pow(x, p), 0.0); },
                              [&phase](double x) { return phase.value(x); },
                              [&phase](double x) { return phase.slope(x); },
                              [](double x) { return 0.5 * x; }, n, xi_max);
  // int_Xi^inf |p| t^(p-1) dt = Xi^p for p < 0.
  const double edge = std::pow(xi_max, p);
  tail.truncation_error = (edge + (p < 0.0 ? edge : 0.0)) / std::abs(phase.slope(xi_max));
  tail.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
  return tail;
}

std::vector<OscillatoryTail> tail_power_phase_table(double p, const PhaseSpec& phase, std::span<const double> ns,
                                                    double xi_factor) {
  std::vector<OscillatoryTail> table;
  for (double n : ns) table.push_back(tail_power_phase(p, phase, n, xi_factor * n));
  fill_fitted_exponent(table);
  return table;
}

// Cubic-root phase -----------------------------------------------------------

namespace {

std::complex<double> cubic_in_y(const DecayingFunction& f, double lambda, double y0, double y1) {
  auto amp = [&f](double y) { return std::complex<double>(3.0 * f.f(y * y * y) * y * y, 0.0); };
  return phase_resolved(amp, [lambda](double y) { return lambda * y; }, [lambda](double) { return lambda; },
                        [](double y) { return std::max(0.5, 0.25 * y); }, y0, y1, true);
}

void check_cubic(const DecayingFunction& f, double lambda) {
  if (!f.f) throw DomainError("cubic_phase_integral needs a function");
  if (lambda == 0.0 && f.decay <= 1.0) {
    throw DivergenceError("lambda = 0 removes the oscillation and f is not absolutely integrable");
  }
}

}  // namespace

std::complex<double> cubic_phase_integral(const DecayingFunction& f, double lambda, double n) {
  if (!(n >= 0.0)) throw DomainError("cubic_phase_integral needs N >= 0");
  check_cubic(f, lambda);
  return cubic_in_y(f, lambda, 0.0, std::cbrt(n));
}

OscillatoryTail cubic_phase_tail(const DecayingFunction& f, double lambda, double n, double y_factor) {
  if (!(n > 0.0)) throw DomainError("cubic_phase_tail needs N > 0");
  if (!(y_factor > 1.0)) throw DomainError("cubic_phase_tail needs y_factor > 1");
  check_cubic(f, lambda);
  const double y0 = std::cbrt(n);
  const double y1 = y_factor * y0;
  const double xi1 = y1 * y1 * y1;
  OscillatoryTail tail;
  tail.n = n;
  tail.value = cubic_in_y(f, lambda, y0, y1);
  const double edge = std::abs(f.f(xi1));
  tail.truncation_error = lambda != 0.0 ? 3.0 * edge * y1 * y1 / std::abs(lambda) : edge * xi1 / (f.decay - 1.0);
  tail.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
  return tail;
}

std::vector<OscillatoryTail> cubic_phase_tail_table(const DecayingFunction& f, double lambda,
                                                    std::span<const double> ns, double y_factor) {
  std::vector<OscillatoryTail> table;
  for (double n : ns) table.push_back(cubic_phase_tail(f, lambda, n, y_factor));
  fill_fitted_exponent(table);
  return table;
}

// Sampled functions ----------------------------------------------------------

SampledFunction SampledFunction::from_real(std::vector<double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("sampled function needs matching sizes >= 2");
  SampledFunction f;
  f.y.assign(y.begin(), y.end());
  f.x = std::move(x);
  for (std::size_t i = 1; i < f.x.size(); ++i) {
    if (f.x[i] < f.x[i - 1]) throw DomainError("sample abscissae must be non-decreasing");
  }
  return f;
}

SampledFunction SampledFunction::tabulate(const std::function<std::complex<double>(double)>& fn, double lo,
                                          double hi, std::size_t intervals) {
  if (!(hi > lo) || intervals == 0) throw DomainError("tabulate needs hi > lo and intervals > 0");
  SampledFunction f;
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double t = i == intervals ? hi : lo + (hi - lo) * static_cast<double>(i) / intervals;
    f.x.push_back(t);
    f.y.push_back(fn(t));
  }
  return f;
}

std::complex<double> SampledFunction::at(double t, int side) const {
  if (x.empty() || t < x.front() || t > x.back()) {
    throw RangeError("sample query at " + std::to_string(t) + " outside [" +
                     std::to_string(x.empty() ? 0.0 : x.front()) + ", " +
                     std::to_string(x.empty() ? 0.0 : x.back()) + "]");
  }
  std::size_t lo;
  std::size_t hi;
  if (side > 0) {
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    if (it == x.end()) return y.back();
    hi = static_cast<std::size_t>(it - x.begin());
    lo = hi - 1;
  } else {
    const auto it = std::lower_bound(x.begin(), x.end(), t);
    hi = static_cast<std::size_t>(it - x.begin());
    if (hi == 0) return y.front();
    lo = hi - 1;
  }
  const double span = x[hi] - x[lo];
  if (span == 0.0) return side > 0 ? y[hi] : y[lo];
  const double s = (t - x[lo]) / span;
  return y[lo] + s * (y[hi] - y[lo]);
}

// Fourier window -------------------------------------------------------------

namespace {

// int_0^1 (1-s) e^{i theta s} ds and int_0^1 s e^{i theta s} ds.
std::pair<std::complex<double>, std::complex<double>> linear_exponential_weights(double theta) {
  const std::complex<double> I(0.0, 1.0);
  if (std::abs(theta) < 0.5) {
    std::complex<double> a{};
    std::complex<double> b{};
    std::complex<double> term(1.0, 0.0);  // (i theta)^n / n!
    for (int n = 0; n < 24; ++n) {
      a += term / ((n + 1.0) * (n + 2.0));
      b += term / (n + 2.0);
      term *= I * theta / (n + 1.0);
    }
    return {a, b};
  }
  const std::complex<double> e = std::polar(1.0, theta);
  const std::complex<double> b = e / (I * theta) + (e - 1.0) / (theta * theta);
  const std::complex<double> whole = (e - 1.0) / (I * theta);
  return {whole - b, b};
}

}  // namespace

std::complex<double> fourier_window(const SampledFunction& f, double k, double n) {
  if (!(n > 0.0)) throw DomainError("fourier_window needs N > 0");
  if (f.x.size() < 2 || f.lo() > -n || f.hi() < n) {
    throw RangeError("samples do not cover the window [-N, N]");
  }
  const double max_segment = k != 0.0 ? 2.0 * kPi / std::abs(k) / 8.0 : std::numeric_limits<double>::infinity();
  std::complex<double> sum{};
  for (std::size_t i = 0; i + 1 < f.x.size(); ++i) {
    double a = f.x[i];
    double b = f.x[i + 1];
    if (b <= -n || a >= n || b == a) continue;
    if (b - a > max_segment * (1.0 + 1e-12)) {
      throw ResolutionError("fewer than 8 samples per period 2pi/|k| near x=" + std::to_string(a));
    }
    std::complex<double> fa = f.y[i];
    std::complex<double> fb = f.y[i + 1];
    if (a < -n) {
      fa = f.y[i] + (-n - a) / (b - a) * (fb - f.y[i]);
      a = -n;
    }
    if (b > n) {
      fb = f.y[i] + (n - f.x[i]) / (f.x[i + 1] - f.x[i]) * (f.y[i + 1] - f.y[i]);
      b = n;
    }
    const double h = b - a;
    const auto [wa, wb] = linear_exponential_weights(k * h);
    sum += h * std::polar(1.0, k * a) * (fa * wa + fb * wb);
  }
  return sum;
}

WindowGrowth fourier_window_growth(const SampledFunction& f, double k, std::span<const double> ns) {
  WindowGrowth g;
  std::vector<double> logs;
  std::vector<double> mags;
  for (double n : ns) {
    g.ns.push_back(n);
    g.values.push_back(fourier_window(f, k, n));
    logs.push_back(std::log(n));
    mags.push_back(std::abs(g.values.back()));
  }
  g.log_slope = fit_line(logs, mags).slope;
  return g;
}

// Maximal function -----------------------------------------------------------

std::vector<double> dyadic_h_grid(int levels) {
  if (levels < 1) throw DomainError("dyadic_h_grid needs at least one level");
  std::vector<double> h;
  for (int j = 1; j <= levels; ++j) h.push_back(std::ldexp(1.0, -j));
  return h;
}

double maximal_plus(const SampledFunction& g, double x, std::span<const double> h_grid) {
  if (h_grid.empty()) throw DomainError("maximal_plus needs a nonempty h grid");
  double h_max = 0.0;
  for (double h : h_grid) {
    if (!(h > 0.0 && h < 1.0)) throw DomainError("maximal_plus h values must lie in (0, 1)");
    h_max = std::max(h_max, h);
  }
  if (g.x.empty() || g.lo() > x - h_max || g.hi() < x + h_max) {
    throw RangeError("samples do not cover [x - h, x + h]");
  }
  // Breakpoints in t: every sample distance below h_max and every h.
  std::vector<double> nodes{0.0};
  for (double xi : g.x) {
    const double t = std::abs(xi - x);
    if (t > 0.0 && t < h_max) nodes.push_back(t);
  }
  nodes.insert(nodes.end(), h_grid.begin(), h_grid.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  // Between breakpoints both g(x+t) and g(x-t) are linear in t.
  std::vector<double> cumulative(nodes.size(), 0.0);
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
    const double a = nodes[j];
    const double b = nodes[j + 1];
    const std::complex<double> start = g.at(x + a, +1) + g.at(x - a, -1);
    const std::complex<double> end = g.at(x + b, -1) + g.at(x - b, +1);
    const double piece = quad::gauss(
        [&](double t) { return std::abs(start + (t - a) / (b - a) * (end - start)); }, a, b, 4);
    cumulative[j + 1] = cumulative[j] + piece;
  }
  double best = 0.0;
  for (double h : h_grid) {
    const std::size_t j = static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), h) - nodes.begin());
    best = std::max(best, cumulative[j] / (2.0 * h));
  }
  return best;
}

// tilde q --------------------------------------------------------------------

namespace {

// 3 c int_{a}^{b} q(c s^2) ds, the x-form of the tilde-q phase integral.
double phase_increment(const PotentialSpec& q, double a, double b) {
  constexpr double c = LiouvilleMap::c;
  const double k = max_wavenumber(q);
  // Knots of a tabulated q, as s = sqrt(x / c).
  std::vector<double> knots = derivative_jumps(q, c * a * a, c * b * b);
  for (double& x : knots) x = std::sqrt(x / c);
  auto knot = knots.begin();
  double sum = 0.0;
  double s = a;
  while (s < b) {
    const double rate = std::max(q_slope(q, c * s * s), k);
    double width = std::min(b - s, 0.5 / (1.0 + 2.0 * c * s * rate));
    while (knot != knots.end() && *knot <= s) ++knot;
    if (knot != knots.end()) width = std::min(width, *knot - s);
    const double right = (b - s - width <= 1e-14 * b) ? b : s + width;
    sum += quad::gauss([&](double t) { return eval(q, c * t * t); }, s, right, 8);
    s = right;
  }
  return 3.0 * c * sum;
}

}  // namespace

double tilde_q_phase_integral(const PotentialSpec& q, double xi) {
  if (!(xi >= 0.0)) throw DomainError("tilde_q phase integral needs xi >= 0");
  // With x = c^(-1/2) y the y-integral 3 sqrt(c) int_0^{sqrt(c) xi^(1/3)} q(y^2) dy
  // becomes 3 c int_0^{xi^(1/3)} q(c x^2) dx.
  return phase_increment(q, 0.0, std::cbrt(xi));
}

std::complex<double> tilde_q(const PotentialSpec& q, double xi) {
  if (!(xi > 0.0)) throw SingularityError("tilde_q needs xi > 0");
  const double x = x_of_xi(xi);
  const double modulus = eval(q, x) / std::cbrt(xi * xi);
  if (modulus == 0.0) return {0.0, 0.0};
  return modulus * std::polar(1.0, 2.0 * xi - tilde_q_phase_integral(q, xi));
}

// S-set ----------------------------------------------------------------------

std::complex<double> s_set_weight(const PotentialSpec& q, double x, SSetVariant variant) {
  if (!(x >= 0.0)) throw DomainError("s_set_weight needs x >= 0");
  if (x == 0.0) return {0.0, 0.0};
  const double cubic = variant == SSetVariant::proof ? 2.0 : 1.0;
  const double amp = eval(q, LiouvilleMap::c * x * x) * std::pow(x, 1.0 / 6.0);
  if (amp == 0.0) return {0.0, 0.0};
  return amp * std::polar(1.0, cubic * x * x * x - phase_increment(q, 0.0, x));
}

SSetDiagnostic s_set_diagnostic(const PotentialSpec& q, double lambda, double n, const SSetOptions& options) {
  if (!(n > 0.0)) throw DomainError("s_set_diagnostic needs N > 0");
  if (!(options.k_spacing > 0.0)) throw DomainError("s_set_diagnostic needs k_spacing > 0");
  constexpr double c = LiouvilleMap::c;
  constexpr std::size_t nodes = quad::detail::kFilonNodes;
  const quad::GaussRule& rule = quad::gauss_rule(nodes);

  SSetDiagnostic out;
  out.lambda = lambda;
  out.n = n;
  out.h_grid = dyadic_h_grid(options.h_levels);

  // k grid on [lambda - 1, lambda + 1] with lambda as a grid point.
  const int half_count = static_cast<int>(std::ceil(1.0 / options.k_spacing - 1e-9));
  std::vector<double> ks;
  for (int j = -half_count; j <= half_count; ++j) ks.push_back(lambda + j * options.k_spacing);
  std::vector<std::complex<double>> phi(ks.size());

  const double cubic = options.variant == SSetVariant::proof ? 2.0 : 1.0;
  auto amplitude = [&](double x) { return x == 0.0 ? 0.0 : eval(q, c * x * x) * std::pow(x, 1.0 / 6.0); };
  // phase(x) = cubic x^3 - P(x), P' = 3 c q(c x^2), P'' = 6 c^2 x q'(c x^2).
  auto slope = [&](double x) { return 3.0 * cubic * x * x - 3.0 * c * eval(q, c * x * x); };

  const double wavenumber = max_wavenumber(q);
  double a = 0.0;
  double p_a = 0.0;  // P(a)
  while (a < n) {
    const double rate = std::max(q_slope(q, c * a * a), wavenumber);
    const double curvature = 6.0 * cubic * a + 6.0 * c * c * a * rate;
    double width = std::min({0.25, std::sqrt(8.0 / std::max(curvature, 1e-300)), std::max(1e-4, 0.5 * a),
                             0.5 / (1.0 + 2.0 * c * a * rate)});
    const double b = (n - a - width <= 1e-12 * n) ? n : a + width;
    if (++out.panels > options.max_panels) {
      throw ResolutionError("S-set window needs more than " + std::to_string(options.max_panels) + " panels");
    }
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double p_mid = p_a + phase_increment(q, a, mid);
    const double phase_mid = cubic * mid * mid * mid - p_mid;
    const double slope_mid = slope(mid);
    std::array<std::complex<double>, nodes> values{};
    std::array<double, nodes> offsets{};
    for (std::size_t i = 0; i < nodes; ++i) {
      const double x = mid + half * rule.nodes[i];
      const double p_x = p_mid + (x >= mid ? phase_increment(q, mid, x) : -phase_increment(q, x, mid));
      const double residual = (cubic * x * x * x - p_x) - phase_mid - slope_mid * (x - mid);
      values[i] = amplitude(x) * std::polar(1.0, residual);
      offsets[i] = x - mid;
    }
    // Linear phase at the centre frequency lambda; the k - lambda factor is smooth on the panel.
    const auto g = filon_weights((slope_mid + lambda) * half);
    for (std::size_t j = 0; j < ks.size(); ++j) {
      const double dk = ks[j] - lambda;
      std::complex<double> acc{};
      for (std::size_t i = 0; i < nodes; ++i) acc += values[i] * g[i] * std::polar(1.0, dk * offsets[i]);
      phi[j] += half * std::polar(1.0, phase_mid + ks[j] * mid) * acc;
    }
    p_a = p_mid + phase_increment(q, mid, b);
    a = b;
  }

  SampledFunction transform;
  transform.x = ks;
  transform.y = phi;
  out.phi_value = phi[static_cast<std::size_t>(half_count)];
  out.mplus_estimate = maximal_plus(transform, lambda, out.h_grid);
  for (double h : out.h_grid) {
    const double hs[] = {h};
    out.averages.push_back(maximal_plus(transform, lambda, hs));
  }
  return out;
}

}  // namespace stark
