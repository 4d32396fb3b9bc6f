#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stark/ode.hpp"
#include "stark/potentials.hpp"

namespace stark {

/// Point of the Prüfer system for omega = R sin(theta), omega' = R cos(theta).
/// theta is unwrapped: it is never reduced modulo 2 pi.
struct PruferState {
  double xi = 1.0;
  double log_r = 0.0;
  double theta = 0.0;
};

/// Stored trajectory point. Besides (log R, theta) the integrator carries two
/// running integrals used by the phase decompositions:
///   v_integral          = int_{xi0}^{xi} V(eta, lambda) d eta
///   lambda_cos_integral = int_{xi0}^{xi} lambda/(c eta^(2/3)) cos(2 theta) d eta
struct PruferSample {
  double xi = 0.0;
  double log_r = 0.0;
  double theta = 0.0;
  double v_integral = 0.0;
  double lambda_cos_integral = 0.0;

  PruferState state() const { return {xi, log_r, theta}; }
};

/// (N, int_{xi0}^{N} V sin(2 theta) d xi)
struct Integral6Point {
  double n = 0.0;
  double value = 0.0;
};

struct TrajectoryOptions {
  double max_step = 0.7853981633974483;  // pi/4
  int diagnostic_per_decade = 64;
  /// Upper end of the diagnostic grid and of the stored int V sin(2 theta) partials;
  /// non-positive means the trajectory end.
  double diagnostic_end = 0.0;
};

class PruferTrajectory {
 public:
  double lambda() const { return lambda_; }
  const PotentialSpec& potential() const { return potential_; }
  double xi0() const { return samples_.front().xi; }
  double xi_end() const { return samples_.back().xi; }
  double rtol() const { return rtol_; }
  double diagnostic_end() const { return diagnostic_end_; }

  /// Accepted integrator steps, strictly increasing in xi.
  std::span<const PruferSample> samples() const { return samples_; }
  /// States interpolated onto the uniform-in-log(xi) diagnostic grid.
  std::span<const PruferSample> diagnostic_grid() const { return diagnostic_; }
  /// Partials of int V sin(2 theta) on the diagnostic grid.
  std::span<const Integral6Point> integral6_partials() const { return partials_; }
  const ode::StepStats& step_stats() const { return stats_; }

  /// Dense output: one error-free step from the accepted sample to the left.
  PruferSample state_at(double xi) const;

  /// Right-hand side of the augmented Prüfer system in the integrated
  /// variables (log R, theta - xi, v_integral, lambda_cos_integral).
  void rhs(double xi, const std::array<double, 4>& y, std::array<double, 4>& dy) const;

  /// Index of the last sample with samples()[i].xi <= xi.
  std::size_t locate(double xi) const;

  /// Cumulative int V sin(2 theta) at every sample up to diagnostic_end; entry i
  /// belongs to samples()[i].
  std::span<const double> cumulative_integral6() const { return cumulative6_; }

 private:
  friend PruferTrajectory integrate_prufer(const PotentialSpec&, double, const PruferState&, double,
                                           double, const TrajectoryOptions&);
  PruferTrajectory() = default;

  PotentialSpec potential_;
  double lambda_ = 0.0;
  double rtol_ = 0.0;
  double diagnostic_end_ = 0.0;
  std::vector<PruferSample> samples_;
  std::vector<PruferSample> diagnostic_;
  std::vector<Integral6Point> partials_;
  std::vector<double> cumulative6_;
  ode::StepStats stats_;
};

/// Step caps that keep the fastest oscillation of q below a fixed phase
/// advance per step: in xi (position dependent, empty when q has no fixed
/// wavenumber) and in x (constant).
std::function<double(double)> xi_step_cap(const PotentialSpec& q);
double x_step_cap(const PotentialSpec& q, double base);

/// derivative_jumps of q inside (x(lo), x(hi)) mapped to xi, merged with
/// the increasing `extra` points.
std::vector<double> xi_stops(const PotentialSpec& q, double lo, double hi, std::span<const double> extra = {});

/// Sampled path of the direct equation -u'' - x u + q u = lambda u in polar
/// form u = rho sin(phi), u' = rho cos(phi), phi unwrapped.
struct DirectSample {
  double x = 0.0;
  double log_rho = 0.0;
  double phi = 0.0;

  double u() const;
  double du() const;
};

/// Integrates the direct equation from x = 0 with (u, u')(0) = exp(log_r0)
/// (sin theta0, cos theta0) to x_end, hitting every entry of `stops`.
std::vector<DirectSample> integrate_direct(const PotentialSpec& q, double lambda, double theta0,
                                           double log_r0, double x_end, double rtol,
                                           std::span<const double> stops = {});

/// Boundary data for the Prüfer system at xi0: the direct equation is solved
/// on [0, x(xi0)] and pushed through the Liouville map; theta continues the
/// polar angle of (u, u') so that it stays on the branch that starts at theta0.
PruferState initial_state(const PotentialSpec& q, double lambda, double theta0, double xi0 = 1.0,
                          double log_r0 = 0.0);

/// Adaptive integration of the Prüfer equations from `start` to xi_end with
/// local error <= rtol per unit step. Throws StiffnessError on step underflow.
PruferTrajectory integrate_prufer(const PotentialSpec& q, double lambda, const PruferState& start,
                                  double xi_end, double rtol, const TrajectoryOptions& options = {});

/// int_{xi0}^{N} V sin(2 theta) by Gauss-Legendre quadrature over the
/// accepted steps; equals 2 (log R(N) - log R(xi0)).
double integral6_partial(const PruferTrajectory& traj, double n);

/// sup |log R - log R(xi0)| over samples with xi <= limit (default: all).
double amplitude_bound(const PruferTrajectory& traj, std::optional<double> limit = std::nullopt);

struct ConvergenceVerdict {
  bool converged = false;
  double oscillation = 0.0;
  /// Least-squares slope of log(window oscillation) against log N; NaN when
  /// fewer than two windows oscillate.
  double rate_slope = 0.0;
};

/// Oscillation (max - min) of the partials over [N_last/decade, N_last].
/// Requires the partials to span at least two decades.
ConvergenceVerdict convergence_verdict(std::span<const Integral6Point> partials, double decade = 10.0,
                                       double tolerance = 0.05);

/// sigma and gamma = 2 theta - sigma, built from the phase equation so that
/// gamma' = b cos(gamma + sigma) holds exactly:
///   sigma(xi) = 2 xi - int V - int lambda/(c eta^(2/3)) cos(2 theta).
struct SigmaGammaPoint {
  double xi = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;
  double b = 0.0;
};

SigmaGammaPoint sigma_gamma_at(const PruferTrajectory& traj, const PruferSample& s);
std::vector<SigmaGammaPoint> sigma_gamma(const PruferTrajectory& traj);

/// max over interior samples of |d gamma/d xi - b cos(gamma + sigma)| / (1 + |b|),
/// with d gamma/d xi from a five-point central difference of the dense output.
/// The step is reduced below fd_step where q oscillates faster.
double gamma_residual(const PruferTrajectory& traj, double fd_step = 1e-2);

/// b(xi) |int_xi^{Xi} b exp(i sigma)|^2 for the decaying-potential regime.
struct DecayingControl {
  double xi = 0.0;
  double control = 0.0;
  std::complex<double> tail;
  double truncation_error = 0.0;
  bool reliable = true;
};

/// |V(xi)| max(|w+|, |w-|)^2 with w+- = int_xi^{Xi} V exp(+-i(2 eta - int V)).
struct SmoothControl {
  double xi = 0.0;
  std::complex<double> w_plus;
  std::complex<double> w_minus;
  double control = 0.0;
  double truncation_error = 0.0;
  bool reliable = true;
};

/// Throws UnreliableTailError when the truncation estimate exceeds half the tail.
DecayingControl control_decaying(const PruferTrajectory& traj, double xi);
SmoothControl control_smooth(const PruferTrajectory& traj, double xi);

/// Bulk versions over increasing xi values; unreliable points are flagged.
std::vector<DecayingControl> control_decaying_profile(const PruferTrajectory& traj,
                                                      std::span<const double> xis);
std::vector<SmoothControl> control_smooth_profile(const PruferTrajectory& traj,
                                                  std::span<const double> xis);

/// Points of the diagnostic grid inside [lo, hi].
std::vector<double> diagnostic_points(const PruferTrajectory& traj, double lo, double hi);

}  // namespace stark
