#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "stark/potentials.hpp"

namespace stark {

/// Truncated oscillatory tail int_N^{Xi} a(xi) exp(i h(xi)) d xi.
struct OscillatoryTail {
  double n = 0.0;
  std::complex<double> value;
  double truncation_error = 0.0;
  /// Slope of log|value| against log N across a table; NaN for single records.
  double fitted_exponent = 0.0;

  bool reliable() const { return truncation_error < 0.5 * std::abs(value); }
};

/// h(xi) = linear xi + cubic_root xi^(1/3) + g(xi), with an optional
/// perturbation g whose derivative is declared to obey |g'| <= bound xi^(-2/3).
struct PhaseSpec {
  double linear_coeff = 1.0;
  double cubic_root_coeff = 0.0;
  std::function<double(double)> perturbation;
  std::function<double(double)> perturbation_derivative;
  double derivative_bound = 0.0;

  double value(double xi) const;
  double slope(double xi) const;
};

/// Checks |g'(xi)| xi^(2/3) <= derivative_bound on the grid; true without g.
bool verify_perturbation_bound(const PhaseSpec& phase, std::span<const double> grid);

/// int_N^{Xi} xi^p exp(i h(xi)) with panels of phase increment <= pi/2.
/// Requires p <= 0, N >= 1, Xi >= 100 N. The truncation estimate is the
/// integration-by-parts remainder (Xi^p + |p| int_Xi^inf t^(p-1)) / |h'(Xi)|.
/// Throws StationaryPhaseError if h' vanishes on [N, Xi].
OscillatoryTail tail_power_phase(double p, const PhaseSpec& phase, double n, double xi_max);

/// tail_power_phase at every N with Xi = xi_factor N; fills fitted_exponent.
std::vector<OscillatoryTail> tail_power_phase_table(double p, const PhaseSpec& phase,
                                                    std::span<const double> ns, double xi_factor = 100.0);

/// Real f on [0, inf) with declared decay |f(xi)| <= C (1+xi)^(-decay).
struct DecayingFunction {
  std::function<double(double)> f;
  double decay = 0.0;
};

/// int_0^N f(xi) exp(i lambda xi^(1/3)) d xi, computed after y = xi^(1/3) as
/// 3 int_0^{N^(1/3)} f(y^3) y^2 exp(i lambda y) dy. Throws DivergenceError
/// for lambda = 0 when f is not absolutely integrable (decay <= 1).
std::complex<double> cubic_phase_integral(const DecayingFunction& f, double lambda, double n);

/// Tail int_N^{Xi} of the same integrand with Xi^(1/3) = y_factor N^(1/3);
/// the truncation estimate is the endpoint remainder 3 f(Xi) Xi^(2/3) / |lambda|.
OscillatoryTail cubic_phase_tail(const DecayingFunction& f, double lambda, double n, double y_factor = 1000.0);
std::vector<OscillatoryTail> cubic_phase_tail_table(const DecayingFunction& f, double lambda,
                                                    std::span<const double> ns, double y_factor = 1000.0);

/// Piecewise-linear samples. x is non-decreasing; a repeated abscissa encodes
/// a jump (left value first, right value second).
struct SampledFunction {
  std::vector<double> x;
  std::vector<std::complex<double>> y;

  static SampledFunction from_real(std::vector<double> x, std::span<const double> y);
  static SampledFunction tabulate(const std::function<std::complex<double>(double)>& f, double lo, double hi,
                                  std::size_t intervals);
  /// Limit from the right (side > 0) or from the left (side < 0).
  std::complex<double> at(double t, int side = 1) const;
  double lo() const { return x.front(); }
  double hi() const { return x.back(); }
};

/// int_{-N}^{N} exp(i k x) f(x) dx for the piecewise-linear interpolant of
/// the samples (exact per segment). Throws RangeError if the samples do not
/// cover [-N, N] and ResolutionError when a segment inside the window is
/// longer than (2 pi / |k|) / 8.
std::complex<double> fourier_window(const SampledFunction& f, double k, double n);

struct WindowGrowth {
  std::vector<double> ns;
  std::vector<std::complex<double>> values;
  /// Slope of |value| against log N (bounded slope is the O(log N) regime).
  double log_slope = 0.0;
};
WindowGrowth fourier_window_growth(const SampledFunction& f, double k, std::span<const double> ns);

/// max over h of (1/2h) int_0^h |g(x+t) + g(x-t)| dt: a lower estimate of the
/// one-sided maximal function on the recorded grid. Each h must lie in (0, 1);
/// the samples must cover [x - max h, x + max h].
double maximal_plus(const SampledFunction& g, double x, std::span<const double> h_grid);

/// Default grid {2^-1, ..., 2^-levels}.
std::vector<double> dyadic_h_grid(int levels);

/// q(c xi^(2/3)) xi^(-2/3) exp(2 i xi - i int_0^xi q(c eta^(2/3)) c eta^(-2/3) d eta).
std::complex<double> tilde_q(const PotentialSpec& q, double xi);

/// 3 sqrt(c) int_0^{sqrt(c) xi^(1/3)} q(y^2) dy: the phase integral of tilde_q
/// after the substitution s = c eta^(2/3) = y^2.
double tilde_q_phase_integral(const PotentialSpec& q, double xi);

enum class SSetVariant {
  /// tilde_q(x^3) x^(13/6)
  proof,
  /// exp(i x^3 - i int_0^{x^3} ...) q(c x^2) x^(1/6)
  statement,
};

struct SSetOptions {
  SSetVariant variant = SSetVariant::proof;
  double k_spacing = 0.0078125;  // 2^-7
  int h_levels = 5;
  std::size_t max_panels = 4000000;
};

struct SSetDiagnostic {
  double lambda = 0.0;
  double n = 0.0;
  std::complex<double> phi_value;
  double mplus_estimate = 0.0;
  std::vector<double> h_grid;
  /// Window averages (1/2h) int_0^h |Phi(lambda+t) + Phi(lambda-t)| per h.
  std::vector<double> averages;
  std::size_t panels = 0;
};

/// Phi of w on [0, N] (w extended by 0 to x < 0) evaluated on a k-grid
/// around lambda, then maximal_plus at lambda.
SSetDiagnostic s_set_diagnostic(const PotentialSpec& q, double lambda, double n, const SSetOptions& options = {});

/// The windowed function w(x) of the chosen variant.
std::complex<double> s_set_weight(const PotentialSpec& q, double x, SSetVariant variant);

}  // namespace stark
