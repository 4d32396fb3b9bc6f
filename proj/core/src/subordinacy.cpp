#include "stark/subordinacy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "stark/errors.hpp"
#include "stark/fit.hpp"
#include "stark/ode.hpp"
#include "stark/prufer.hpp"
#include "stark/quadrature.hpp"
#include "stark/transforms.hpp"

namespace stark {
namespace {

constexpr double kPi = 3.141592653589793;
constexpr long kFineCells = 8;
constexpr long kFineSplit = 8;

double second_derivative(const PotentialSpec& q, double lambda, double x, double u) {
  return (eval(q, x) - x - lambda) * u;
}

// Quintic Hermite interpolant on [0, 1] from value, slope and curvature at
// both ends (slopes and curvatures already scaled by h and h^2).
double quintic(double s, double f0, double d0, double s0, double f1, double d1, double s1) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double s4 = s3 * s;
  const double s5 = s4 * s;
  return f0 * (1 - 10 * s3 + 15 * s4 - 6 * s5) + d0 * (s - 6 * s3 + 8 * s4 - 3 * s5) +
         s0 * (0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5) + f1 * (10 * s3 - 15 * s4 + 6 * s5) +
         d1 * (-4 * s3 + 7 * s4 - 3 * s5) + s1 * (0.5 * s3 - s4 + 0.5 * s5);
}

std::size_t interval_of(const std::vector<double>& x, double t) {
  auto it = std::upper_bound(x.begin(), x.end(), t);
  if (it == x.begin()) return 0;
  const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
  return std::min(i, x.size() - 2);
}

bool same_grid(const SolutionSample& a, const SolutionSample& b) {
  return a.lambda == b.lambda && a.x == b.x;
}

}  // namespace

// solve_original -------------------------------------------------------------------

SolutionSample solve_original(const PotentialSpec& q, double lambda, double theta0, double x_max,
                              double log_r0, const SolveOptions& options) {
  if (!(x_max >= 1.0)) throw DomainError("solve_original needs X >= 1");
  if (!(options.xi_spacing > 0.0 && options.x_spacing > 0.0)) throw DomainError("grid spacings must be positive");
  const double x_join = x_of_xi(1.0);
  const double x_overlap = 10.0 * x_join;

  SolutionSample sol;
  sol.lambda = lambda;
  sol.theta0 = theta0;
  sol.log_r0 = log_r0;

  // Deterministic grid: uniform in x up to the join, uniform in xi after it.
  std::vector<double> xi_grid;
  for (int i = 0;; ++i) {
    const double x = i * options.x_spacing;
    if (x >= std::min(x_join, x_max) * (1.0 - 1e-12)) break;
    sol.x.push_back(x);
  }
  sol.x.push_back(std::min(x_join, x_max));
  if (x_max > x_join) {
    const double xi_end = xi_of_x(x_max);
    // The first cells sit before the solution settles into regular oscillation, where the
    // quintic L2 rule has no sign cancellation, so they are split kFineSplit ways.
    for (long k = 1;; ++k) {
      const long coarse = k <= kFineCells * kFineSplit ? 0 : k - kFineCells * kFineSplit;
      const double cells = coarse == 0 ? static_cast<double>(k) / kFineSplit : static_cast<double>(kFineCells + coarse);
      const double xi = 1.0 + cells * options.xi_spacing;
      if (xi >= xi_end * (1.0 - 1e-12)) break;
      xi_grid.push_back(xi);
    }
    xi_grid.push_back(xi_end);
  }

  // Direct segment, continued across the overlap decade for the gate.
  std::vector<double> direct_stops(sol.x.begin(), sol.x.end());
  for (double xi : xi_grid) {
    const double x = x_of_xi(xi);
    if (x > x_overlap) break;
    direct_stops.push_back(x);
  }
  const double direct_end = direct_stops.back();
  const auto path = integrate_direct(q, lambda, theta0, log_r0, direct_end, options.rtol, direct_stops);
  std::vector<DirectSample> at_stops;
  at_stops.reserve(direct_stops.size());
  {
    std::size_t j = 0;
    for (double x : direct_stops) {
      while (j < path.size() && path[j].x < x) ++j;
      if (j == path.size() || path[j].x != x) throw IntegrationFailure("direct solver missed a grid point");
      at_stops.push_back(path[j]);
    }
  }
  for (std::size_t i = 0; i < sol.x.size(); ++i) {
    sol.u.push_back(at_stops[i].u());
    sol.du.push_back(at_stops[i].du());
  }

  if (!xi_grid.empty()) {
    const PruferState start = initial_state(q, lambda, theta0, 1.0, log_r0);
    using State = std::array<double, 2>;
    auto system = [&q, lambda](double xi, const State& y, State& dy) {
      const double v = effective_potential(q, xi, lambda);
      // y[1] is theta - xi; see integrate_prufer.
      const double theta = y[1] + xi;
      dy[0] = 0.5 * v * std::sin(2.0 * theta);
      dy[1] = -0.5 * v * (1.0 - std::cos(2.0 * theta));
    };
    ode::Options opts;
    opts.tolerance = options.rtol;
    opts.max_step_at = xi_step_cap(q);
    ode::AdaptiveIntegrator<2> integrator(opts);
    State y{start.log_r, start.theta - 1.0};
    std::size_t next = 0;
    std::size_t overlap_index = sol.x.size();
    integrator.integrate(
        system, 1.0, y, xi_grid.back(),
        [&](double xi, const State& s) {
          if (next >= xi_grid.size() || xi != xi_grid[next]) return;
          ++next;
          const double r = std::exp(s[0]);
          const double theta = s[1] + xi;
          const Phase2 p = pull_solution(r * std::sin(theta), r * std::cos(theta), xi);
          // The round trip through xi may land an ulp off the requested end.
          const double x = next == xi_grid.size() ? x_max : x_of_xi(xi);
          if (overlap_index < at_stops.size()) {
            const DirectSample& d = at_stops[overlap_index++];
            const double err = std::hypot(p.value - d.u(), p.slope - d.du()) / std::hypot(d.u(), d.du());
            sol.overlap_error = std::max(sol.overlap_error, err);
          }
          sol.x.push_back(x);
          sol.u.push_back(p.value);
          sol.du.push_back(p.slope);
        },
        xi_stops(q, 1.0, xi_grid.back(), xi_grid));
    if (next != xi_grid.size()) throw IntegrationFailure("Prüfer solver missed a grid point");
    if (sol.overlap_error > options.overlap_gate) {
      throw IntegrationFailure("direct and transformed solutions disagree by " +
                               std::to_string(sol.overlap_error) + " across the overlap decade");
    }
  }

  sol.ddu.resize(sol.x.size());
  for (std::size_t i = 0; i < sol.x.size(); ++i) sol.ddu[i] = second_derivative(q, lambda, sol.x[i], sol.u[i]);
  sol.l2.assign(sol.x.size(), 0.0);
  for (std::size_t i = 0; i + 1 < sol.x.size(); ++i) {
    const double u0 = sol.u[i];
    const double u1 = sol.u[i + 1];
    const double d0 = sol.du[i];
    const double d1 = sol.du[i + 1];
    sol.l2[i + 1] = sol.l2[i] + quad::hermite_quintic_step(sol.x[i + 1] - sol.x[i], u0 * u0, 2 * u0 * d0,
                                                           2 * d0 * d0 + 2 * u0 * sol.ddu[i], u1 * u1, 2 * u1 * d1,
                                                           2 * d1 * d1 + 2 * u1 * sol.ddu[i + 1]);
  }
  return sol;
}

double l2_growth(const SolutionSample& sol, double n) {
  if (sol.x.size() < 2 || n < 0.0 || n > sol.x.back()) throw RangeError("l2_growth: N outside the solution grid");
  const std::size_t i = interval_of(sol.x, n);
  if (n == sol.x[i]) return sol.l2[i];
  if (n == sol.x[i + 1]) return sol.l2[i + 1];
  const double h = sol.x[i + 1] - sol.x[i];
  const double s_end = (n - sol.x[i]) / h;
  const double partial = quad::gauss(
      [&](double s) {
        const double v = quintic(s, sol.u[i], sol.du[i] * h, sol.ddu[i] * h * h, sol.u[i + 1], sol.du[i + 1] * h,
                                 sol.ddu[i + 1] * h * h);
        return v * v;
      },
      0.0, s_end, 8);
  return sol.l2[i] + h * partial;
}

double subordinacy_ratio(const SolutionSample& sol1, const SolutionSample& sol2, double n) {
  if (!same_grid(sol1, sol2)) throw DomainError("subordinacy_ratio needs solutions on the same lambda and grid");
  const double den = l2_growth(sol2, n);
  if (!(den > 0.0)) throw DomainError("subordinacy_ratio: second solution has zero norm");
  return std::sqrt(l2_growth(sol1, n) / den);
}

double wronskian_drift(const SolutionSample& sol1, const SolutionSample& sol2) {
  if (!same_grid(sol1, sol2)) throw DomainError("wronskian_drift needs solutions on the same lambda and grid");
  const double w0 = sol1.u[0] * sol2.du[0] - sol1.du[0] * sol2.u[0];
  if (w0 == 0.0) throw DomainError("wronskian_drift: solutions are linearly dependent");
  double drift = 0.0;
  for (std::size_t i = 0; i < sol1.x.size(); ++i) {
    const double w = sol1.u[i] * sol2.du[i] - sol1.du[i] * sol2.u[i];
    drift = std::max(drift, std::abs(w - w0) / std::abs(w0));
  }
  return drift;
}

RatioTrend subordinacy_trend(const SolutionSample& sol1, const SolutionSample& sol2, double lo, double hi,
                             std::size_t points) {
  if (!(hi > lo && lo > 0.0) || points < 2) throw DomainError("subordinacy_trend needs 0 < lo < hi and 2+ points");
  RatioTrend t;
  std::vector<double> lr;
  for (std::size_t k = 0; k < points; ++k) {
    const double n = k + 1 == points ? hi : lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1));
    t.ns.push_back(n);
    t.ratios.push_back(subordinacy_ratio(sol1, sol2, n));
  }
  t.slope = fit_loglog(t.ns, t.ratios).slope;
  return t;
}

AsymptoticFit asymptotic_fit(const SolutionSample& sol, double x1, double x2) {
  if (!(x2 > x1 && x1 > 0.0)) throw DomainError("asymptotic_fit needs 0 < x1 < x2");
  if (sol.x.empty() || x1 < sol.x.front() || x2 > sol.x.back()) throw RangeError("asymptotic_fit window outside grid");
  if ((xi_of_x(x2) - xi_of_x(x1)) / kPi < 5.0) {
    throw ResolutionError("asymptotic_fit window holds fewer than 5 oscillations");
  }
  AsymptoticFit fit;
  std::vector<double> amplitude;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < sol.x.size(); ++i) {
    const double x = sol.x[i];
    if (x < x1 || x > x2) continue;
    const Phase2 w = push_solution(sol.u[i], sol.du[i], x);
    const double xi = xi_of_x(x);
    double f = std::atan2(w.value, w.slope) - xi;
    // Keep f continuous: nearest branch to the previous point.
    if (std::isnan(previous)) {
      f = std::remainder(f, 2.0 * kPi);
    } else {
      f = previous + std::remainder(f - previous, 2.0 * kPi);
    }
    previous = f;
    fit.x.push_back(x);
    fit.phase.push_back(f);
    amplitude.push_back(std::hypot(w.value, w.slope));
  }
  if (fit.x.size() < 3) throw ResolutionError("asymptotic_fit window holds fewer than 3 grid points");
  double mean = 0.0;
  for (double a : amplitude) mean += a;
  mean /= static_cast<double>(amplitude.size());
  fit.amplitude = mean;
  for (double a : amplitude) fit.residual = std::max(fit.residual, std::abs(a - mean) / mean);
  for (std::size_t i = 1; i + 1 < fit.x.size(); ++i) {
    const double slope = (fit.phase[i + 1] - fit.phase[i - 1]) / (fit.x[i + 1] - fit.x[i - 1]);
    fit.f_prime_envelope = std::max(fit.f_prime_envelope, std::abs(slope) * std::sqrt(1.0 + fit.x[i]));
  }
  return fit;
}

// Survey ---------------------------------------------------------------------------

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::ac_consistent:
      return "ac_consistent";
    case Verdict::inconclusive:
      return "inconclusive";
    case Verdict::resonant:
      return "resonant";
  }
  return "inconclusive";
}

std::size_t SurveyReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(verdicts.begin(), verdicts.end(), [](const SpectralVerdict& v) { return !v.error.empty(); }));
}

SpectralVerdict analyze_energy(const PotentialSpec& q, double lambda, const SurveyConfig& config) {
  SpectralVerdict v;
  v.lambda = lambda;
  v.decay_hypothesis = q.decay_hypothesis();
  v.smoothness_hypothesis = q.smoothness_hypothesis();
  try {
    if (!(config.tail_factor >= 1.0)) throw DomainError("tail_factor must be >= 1");
    const PruferState start = initial_state(q, lambda, config.theta0, config.xi0);
    TrajectoryOptions options;
    options.diagnostic_end = config.xi_max;
    const PruferTrajectory traj =
        integrate_prufer(q, lambda, start, config.tail_factor * config.xi_max, config.rtol, options);
    v.accepted_steps = traj.step_stats().accepted;
    v.rejected_steps = traj.step_stats().rejected;
    v.amplitude_bound = amplitude_bound(traj, config.xi_max);
    const ConvergenceVerdict cv = convergence_verdict(traj.integral6_partials(), 10.0, config.integral6_tolerance);
    v.integral6_converged = cv.converged;
    v.integral6_oscillation = cv.oscillation;
    v.integral6_rate_slope = cv.rate_slope;
    v.diagnostic.assign(traj.diagnostic_grid().begin(), traj.diagnostic_grid().end());
    v.integral6.assign(traj.integral6_partials().begin(), traj.integral6_partials().end());

    const double hi = std::min(config.control_hi, config.xi_max);
    const auto points = diagnostic_points(traj, config.control_lo, hi);
    std::vector<double> control;
    const bool smooth = v.smoothness_hypothesis && !v.decay_hypothesis;
    v.control_kind = smooth ? "smooth" : "decaying";
    if (smooth) {
      for (const auto& c : control_smooth_profile(traj, points)) {
        control.push_back(c.control);
        v.unreliable_controls += c.reliable ? 0 : 1;
      }
    } else {
      for (const auto& c : control_decaying_profile(traj, points)) {
        control.push_back(c.control);
        v.unreliable_controls += c.reliable ? 0 : 1;
      }
    }
    v.control_slope = fit_loglog(points, control).slope;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
      if (points[i] < hi / 10.0 * (1.0 - 1e-12)) continue;
      v.control_l1_tail += 0.5 * (control[i] + control[i + 1]) * (points[i + 1] - points[i]);
    }

    if (config.subordinacy_x > 0.0) {
      const double x_max = config.subordinacy_x;
      const SolutionSample s1 = solve_original(q, lambda, 0.0, x_max);
      const SolutionSample s2 = solve_original(q, lambda, kPi / 2.0, x_max);
      v.subordinacy_ratio = subordinacy_ratio(s1, s2, x_max);
      v.subordinacy_slope = subordinacy_trend(s1, s2, x_max / 10.0, x_max).slope;
      v.wronskian_drift = wronskian_drift(s1, s2);
      const AsymptoticFit fit = asymptotic_fit(s1, x_max / 10.0, x_max);
      v.asymptotic_residual = fit.residual;
      v.f_prime_envelope = fit.f_prime_envelope;
      const int per_decade = 16;
      for (int k = 0;; ++k) {
        double n = std::pow(10.0, static_cast<double>(k) / per_decade);
        const bool last = n >= x_max * (1.0 - 1e-12);
        if (last) n = x_max;
        v.l2_profile.push_back({n, l2_growth(s1, n) / std::sqrt(n)});
        if (last) break;
      }
    }

    const bool bounded = std::isfinite(v.amplitude_bound);
    bool no_subordinate = true;
    if (v.subordinacy_ratio) {
      no_subordinate = *v.subordinacy_ratio >= config.ratio_low && *v.subordinacy_ratio <= config.ratio_high &&
                       std::abs(*v.subordinacy_slope) <= config.ratio_slope_tolerance;
    }
    if (bounded && cv.converged && no_subordinate) {
      v.verdict = Verdict::ac_consistent;
    } else if (!cv.converged && std::isfinite(cv.rate_slope) && cv.rate_slope > config.resonant_rate) {
      v.verdict = Verdict::resonant;
    } else {
      v.verdict = Verdict::inconclusive;
    }
  } catch (const std::exception& e) {
    v.verdict = Verdict::inconclusive;
    v.error = e.what();
  }
  return v;
}

SurveyReport spectral_survey(const PotentialSpec& q, std::span<const double> lambdas, const SurveyConfig& config) {
  if (lambdas.empty()) throw DomainError("spectral_survey needs a nonempty lambda grid");
  SurveyReport report;
  report.potential = q;
  report.config = config;
  report.disclaimer =
      "finite-horizon proxy: verdicts are numerical evidence at the sampled energies and horizons, not "
      "statements about almost every energy";
  report.verdicts.resize(lambdas.size());

  unsigned workers = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(lambdas.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < lambdas.size(); i = next++) {
      report.verdicts[i] = analyze_energy(q, lambdas[i], config);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  std::stable_sort(report.verdicts.begin(), report.verdicts.end(),
                   [](const SpectralVerdict& a, const SpectralVerdict& b) { return a.lambda < b.lambda; });
  return report;
}

}  // namespace stark
