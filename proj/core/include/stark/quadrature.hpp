#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>

namespace stark::quad {

/// Gauss-Legendre rule with n nodes on [-1, 1].
struct GaussRule {
  std::array<double, 16> nodes{};
  std::array<double, 16> weights{};
  std::size_t size = 0;
};

/// n in [1, 16].
const GaussRule& gauss_rule(std::size_t n);

/// Integral of f over [a, b] with an n-point Gauss-Legendre rule.
template <class F>
auto gauss(F&& f, double a, double b, std::size_t n = 8) {
  const GaussRule& rule = gauss_rule(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  decltype(f(mid)) sum{};
  for (std::size_t i = 0; i < rule.size; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

/// Sample of an oscillatory integrand a(x) exp(i phi(x)).
struct OscillatorySample {
  std::complex<double> amplitude;
  double phase;
};

/// Filon-type panel rule for the integral of a(x) exp(i phi(x)) over [a, b].
///
/// The phase is split into its tangent line at the panel midpoint (slope
/// `phase_slope`) and a residual; the amplitude times the residual factor is
/// projected on Legendre polynomials with a 12-point Gauss rule and the
/// linear-phase moments are integrated in closed form through
///   int_{-1}^{1} P_n(t) exp(i k t) dt = 2 i^n j_n(k).
/// Exact for polynomial amplitudes of degree < 12 under a linear phase, for
/// any frequency.
template <class F>
std::complex<double> filon_panel(F&& sample, double a, double b, double phase_slope);

/// Moments 2 i^n j_n(k), n = 0..count-1.
void legendre_exponential_moments(double k, std::span<std::complex<double>> out);

/// Value and slope of a piecewise cubic Hermite interpolant; used to locate
/// zeros and resample solution grids.
double hermite_cubic(double x0, double y0, double d0, double x1, double y1, double d1, double x);

/// Two-point Hermite (Obreshkov) rule using f, f', f'' at both ends:
///   h/2 (f0 + f1) + h^2/10 (f0' - f1') + h^3/120 (f0'' + f1'').
double hermite_quintic_step(double h, double f0, double d0, double s0, double f1, double d1, double s1);

// ---------------------------------------------------------------------------

namespace detail {
constexpr std::size_t kFilonNodes = 12;
void legendre_values(double t, std::span<double> out);
}  // namespace detail

template <class F>
std::complex<double> filon_panel(F&& sample, double a, double b, double phase_slope) {
  constexpr std::size_t n = detail::kFilonNodes;
  const GaussRule& rule = gauss_rule(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const OscillatorySample centre = sample(mid);
  std::array<std::complex<double>, n> coeff{};
  std::array<double, n> legendre{};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rule.nodes[i];
    const OscillatorySample s = sample(mid + half * t);
    const double residual = s.phase - centre.phase - phase_slope * half * t;
    const std::complex<double> value = s.amplitude * std::polar(1.0, residual);
    detail::legendre_values(t, legendre);
    for (std::size_t k = 0; k < n; ++k) coeff[k] += rule.weights[i] * legendre[k] * value;
  }
  std::array<std::complex<double>, n> moments{};
  legendre_exponential_moments(phase_slope * half, moments);
  std::complex<double> sum{};
  for (std::size_t k = 0; k < n; ++k) sum += (0.5 * (2.0 * k + 1.0)) * coeff[k] * moments[k];
  return half * std::polar(1.0, centre.phase) * sum;
}

}  // namespace stark::quad
