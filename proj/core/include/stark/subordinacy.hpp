#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stark/potentials.hpp"
#include "stark/prufer.hpp"

namespace stark {

struct SolveOptions {
  double rtol = 1e-12;
  /// Grid spacing in xi on the transformed segment (x >= x_of_xi(1)).
  double xi_spacing = 0.39269908169872414;  // pi/8
  /// Grid spacing in x on the direct segment [0, x_of_xi(1)].
  double x_spacing = 0.015625;
  /// Agreement required between direct and transformed integration over the
  /// decade x in [x_of_xi(1), 10 x_of_xi(1)].
  double overlap_gate = 1e-6;
};

/// Solution of -u'' - x u + q u = lambda u with (u, u')(0) = exp(log_r0) (sin theta0, cos theta0),
/// sampled on a grid that depends only on (X, options) so that solutions for
/// different boundary data can be compared pointwise.
struct SolutionSample {
  double lambda = 0.0;
  double theta0 = 0.0;
  double log_r0 = 0.0;
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> du;
  /// u'' = (q - x - lambda) u.
  std::vector<double> ddu;
  /// int_0^{x[i]} u^2.
  std::vector<double> l2;
  /// Max relative (u, u') disagreement seen across the overlap decade.
  double overlap_error = 0.0;
};

/// Direct integration up to x_of_xi(1), Prüfer variables beyond, pulled
/// back to (u, u'). Throws IntegrationFailure if the overlap gate fails and
/// StiffnessError on step collapse.
SolutionSample solve_original(const PotentialSpec& q, double lambda, double theta0, double x_max,
                              double log_r0 = 0.0, const SolveOptions& options = {});

/// int_0^N u^2 (quintic Hermite rule on the stored grid).
double l2_growth(const SolutionSample& sol, double n);

/// sqrt(l2_growth(sol1, N) / l2_growth(sol2, N)); both samples must share
/// lambda and grid.
double subordinacy_ratio(const SolutionSample& sol1, const SolutionSample& sol2, double n);

/// max_i |W(x_i) - W(x_0)| / |W(x_0)| for W = u1 u2' - u1' u2.
double wronskian_drift(const SolutionSample& sol1, const SolutionSample& sol2);

struct RatioTrend {
  std::vector<double> ns;
  std::vector<double> ratios;
  /// Slope of log ratio against log N.
  double slope = 0.0;
};

/// Ratios at `points` log-spaced N in [lo, hi].
RatioTrend subordinacy_trend(const SolutionSample& sol1, const SolutionSample& sol2, double lo, double hi,
                             std::size_t points = 9);

/// u = A(x) sin((2/3) x^(3/2) + f(x)) read through the Liouville map:
/// A(x) x^(1/4) = R and f = theta - xi.
struct AsymptoticFit {
  /// Window mean of A(x) x^(1/4).
  double amplitude = 0.0;
  std::vector<double> x;
  std::vector<double> phase;
  /// max relative deviation of A(x) x^(1/4) from its mean.
  double residual = 0.0;
  /// max |f'(x)| (1+x)^(1/2).
  double f_prime_envelope = 0.0;
};

/// Throws RangeError outside the grid and ResolutionError for windows with
/// fewer than 5 oscillations.
AsymptoticFit asymptotic_fit(const SolutionSample& sol, double x1, double x2);

// Survey -----------------------------------------------------------------------

enum class Verdict { ac_consistent, inconclusive, resonant };
std::string_view to_string(Verdict verdict);

struct SurveyConfig {
  double xi0 = 1.0;
  double xi_max = 1e4;
  /// Trajectories run to tail_factor * xi_max so control tails are not
  /// dominated by truncation inside the regression range.
  double tail_factor = 10.0;
  double rtol = 1e-12;
  double theta0 = 0.0;
  double integral6_tolerance = 0.05;
  double ratio_low = 0.2;
  double ratio_high = 5.0;
  double ratio_slope_tolerance = 0.05;
  /// Resonant when the partials of int V sin(2 theta) fail to settle and the window oscillation
  /// decays slower than N^resonant_rate.
  double resonant_rate = -0.1;
  double control_lo = 1e2;
  double control_hi = 1e4;
  /// Upper end x of the subordinacy solves; non-positive disables them.
  double subordinacy_x = 1e3;
  /// Worker threads; 0 means hardware concurrency.
  unsigned threads = 0;
};

struct SpectralVerdict {
  double lambda = 0.0;
  Verdict verdict = Verdict::inconclusive;
  double amplitude_bound = 0.0;
  double integral6_oscillation = 0.0;
  double integral6_rate_slope = 0.0;
  bool integral6_converged = false;
  std::string control_kind;
  double control_slope = 0.0;
  /// Trapezoid in xi of the control over the last decade of the regression range.
  double control_l1_tail = 0.0;
  std::size_t unreliable_controls = 0;
  std::optional<double> subordinacy_ratio;
  std::optional<double> subordinacy_slope;
  std::optional<double> wronskian_drift;
  std::optional<double> asymptotic_residual;
  std::optional<double> f_prime_envelope;
  bool decay_hypothesis = false;
  bool smoothness_hypothesis = false;
  long accepted_steps = 0;
  long rejected_steps = 0;
  std::string error;

  // Profiles kept for plots and CSV dumps.
  std::vector<PruferSample> diagnostic;
  std::vector<Integral6Point> integral6;
  /// (N, l2_growth(N) / N^(1/2)) for the theta0 = 0 solution.
  std::vector<std::array<double, 2>> l2_profile;
};

struct SurveyReport {
  PotentialSpec potential;
  SurveyConfig config;
  std::vector<SpectralVerdict> verdicts;  // sorted by lambda
  std::string disclaimer;
  std::size_t failures() const;
};

/// Full diagnostic pipeline at one energy. Numeric failures are recorded in
/// `error` (verdict inconclusive), never thrown.
SpectralVerdict analyze_energy(const PotentialSpec& q, double lambda, const SurveyConfig& config);

/// analyze_energy over the grid on a bounded worker pool.
SurveyReport spectral_survey(const PotentialSpec& q, std::span<const double> lambdas, const SurveyConfig& config);

}  // namespace stark
