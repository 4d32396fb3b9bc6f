#include "stark/prufer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stark/errors.hpp"
#include "stark/fit.hpp"
#include "stark/quadrature.hpp"
#include "stark/transforms.hpp"

namespace stark {
namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr std::size_t kStepNodes = 6;
constexpr int kMaxRefinement = 8;
constexpr double kPanelTolerance = 1e-13;

using State4 = std::array<double, 4>;
using State2 = std::array<double, 2>;

// The integrated phase component is theta - xi. It stays O(xi^(1/3)), so
// rounding does not pile up the way it would on theta ~ xi itself.
PruferSample to_sample(double xi, const State4& y) { return {xi, y[0], y[1] + xi, y[2], y[3]}; }
State4 to_state(const PruferSample& s) { return {s.log_r, s.theta - s.xi, s.v_integral, s.lambda_cos_integral}; }

void check_rtol(double rtol) {
  if (!(rtol >= 1e-14 && rtol <= 1e-3)) throw DomainError("rtol must lie in [1e-14, 1e-3]");
}

// Sorted union of two increasing point lists.
std::vector<double> merged(std::vector<double> a, std::span<const double> b) {
  if (a.empty()) return {b.begin(), b.end()};
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

// Integral of V sin(2 theta) over [a, b] inside one accepted step. The
// integrator resolves theta, but V may oscillate faster than the step
// (weierstrass_smooth at large K), so panels are halved until two levels agree.
double step_integral6(const PruferTrajectory& traj, double a, double b) {
  if (b <= a) return 0.0;
  const PotentialSpec& q = traj.potential();
  const double lambda = traj.lambda();
  auto integrand = [&](double xi) {
    const PruferSample s = traj.state_at(xi);
    return effective_potential(q, xi, lambda) * std::sin(2.0 * s.theta);
  };
  auto panel = [&](auto&& self, double lo, double hi, double whole, int depth) -> double {
    const double mid = 0.5 * (lo + hi);
    const double left = quad::gauss(integrand, lo, mid, kStepNodes);
    const double right = quad::gauss(integrand, mid, hi, kStepNodes);
    if (depth >= kMaxRefinement || std::abs(left + right - whole) <= kPanelTolerance * (hi - lo)) return left + right;
    return self(self, lo, mid, left, depth + 1) + self(self, mid, hi, right, depth + 1);
  };
  return panel(panel, a, b, quad::gauss(integrand, a, b, kStepNodes), 0);
}

// Phase advance of the fastest term of q allowed per step; the 7(8) error
// estimate is unreliable well beyond this.
constexpr double kRadiansPerStep = 2.0;

double sigma_of(const PruferSample& s) { return 2.0 * s.xi - s.v_integral - s.lambda_cos_integral; }

// Oscillatory panel over [a, b] inside one accepted step.
template <class Amplitude, class Phase, class Slope>
std::complex<double> step_panel(const PruferTrajectory& traj, double a, double b, Amplitude&& amplitude,
                                Phase&& phase, Slope&& slope) {
  if (b <= a) return {0.0, 0.0};
  const double mid = 0.5 * (a + b);
  const PruferSample centre = traj.state_at(mid);
  return quad::filon_panel(
      [&](double xi) {
        const PruferSample s = traj.state_at(xi);
        return quad::OscillatorySample{amplitude(s), phase(s)};
      },
      a, b, slope(centre));
}

template <class Amplitude, class Phase, class Slope>
std::vector<std::complex<double>> tails_at(const PruferTrajectory& traj, std::span<const double> xis,
                                           Amplitude&& amplitude, Phase&& phase, Slope&& slope) {
  auto samples = traj.samples();
  std::vector<std::complex<double>> out(xis.size());
  if (xis.empty()) return out;
  for (std::size_t k = 1; k < xis.size(); ++k) {
    if (xis[k] < xis[k - 1]) throw DomainError("control profile needs increasing xi");
  }
  if (xis.front() < traj.xi0() || xis.back() > traj.xi_end()) {
    throw RangeError("control profile point outside the trajectory");
  }
  // Backward accumulation over accepted steps from the trajectory end.
  const std::size_t first = traj.locate(xis.front());
  std::vector<std::complex<double>> from(samples.size(), {0.0, 0.0});
  for (std::size_t i = samples.size() - 1; i-- > first;) {
    from[i] = from[i + 1] + step_panel(traj, samples[i].xi, samples[i + 1].xi, amplitude, phase, slope);
  }
  for (std::size_t k = 0; k < xis.size(); ++k) {
    const std::size_t i = traj.locate(xis[k]);
    if (i + 1 >= samples.size()) {
      out[k] = {0.0, 0.0};
      continue;
    }
    out[k] = from[i + 1] + step_panel(traj, xis[k], samples[i + 1].xi, amplitude, phase, slope);
  }
  return out;
}

}  // namespace

// DirectSample ----------------------------------------------------------------

double DirectSample::u() const { return std::exp(log_rho) * std::sin(phi); }
double DirectSample::du() const { return std::exp(log_rho) * std::cos(phi); }

std::vector<DirectSample> integrate_direct(const PotentialSpec& q, double lambda, double theta0,
                                           double log_r0, double x_end, double rtol,
                                           std::span<const double> stops) {
  if (!(x_end > 0.0)) throw DomainError("direct integration needs x_end > 0");
  check_rtol(rtol);
  // u'' = W u with W = q - x - lambda, in polar form.
  auto system = [&q, lambda](double x, const State2& y, State2& dy) {
    const double w = eval(q, x) - x - lambda;
    const double s = std::sin(y[1]);
    const double c = std::cos(y[1]);
    dy[0] = s * c * (1.0 + w);
    dy[1] = c * c - w * s * s;
  };
  ode::Options opts;
  opts.tolerance = rtol;
  opts.max_step = x_step_cap(q, 0.125);
  ode::AdaptiveIntegrator<2> integrator(opts);
  std::vector<DirectSample> path{{0.0, log_r0, theta0}};
  State2 y{log_r0, theta0};
  const auto all_stops = merged(derivative_jumps(q, 0.0, x_end), stops);
  integrator.integrate(
      system, 0.0, y, x_end, [&](double x, const State2& s) { path.push_back({x, s[0], s[1]}); }, all_stops);
  return path;
}

std::function<double(double)> xi_step_cap(const PotentialSpec& q) {
  const double k = max_wavenumber(q);
  if (k <= 0.0) return {};
  // d/dxi of k x(xi) is k x^(-1/2).
  return [k](double xi) { return kRadiansPerStep * std::sqrt(x_of_xi(xi)) / k; };
}

double x_step_cap(const PotentialSpec& q, double base) {
  const double k = max_wavenumber(q);
  return k > 0.0 ? std::min(base, kRadiansPerStep / k) : base;
}

std::vector<double> xi_stops(const PotentialSpec& q, double lo, double hi, std::span<const double> extra) {
  std::vector<double> jumps = derivative_jumps(q, x_of_xi(lo), x_of_xi(hi));
  for (double& x : jumps) x = xi_of_x(x);
  return merged(std::move(jumps), extra);
}

PruferState initial_state(const PotentialSpec& q, double lambda, double theta0, double xi0, double log_r0) {
  if (!(xi0 > 0.0)) throw SingularityError("initial_state needs xi0 > 0");
  const double x1 = x_of_xi(xi0);
  const auto path = integrate_direct(q, lambda, theta0, log_r0, x1, 1e-13);
  const DirectSample& end = path.back();
  // Work with the unit vector (sin phi, cos phi); the amplitude is carried in log form.
  const double su = std::sin(end.phi);
  const double cu = std::cos(end.phi);
  const Phase2 w = push_solution(su, cu, x1);
  const double norm = std::hypot(w.value, w.slope);
  if (!(norm > 0.0) || !std::isfinite(norm) || !std::isfinite(end.log_rho)) {
    throw IntegrationFailure("Prüfer amplitude vanished at the matching point");
  }
  const double turn = std::remainder(std::atan2(w.value, w.slope) - std::atan2(su, cu), kTwoPi);
  return {xi0, end.log_rho + std::log(norm), end.phi + turn};
}

// PruferTrajectory --------------------------------------------------------------

void PruferTrajectory::rhs(double xi, const State4& y, State4& dy) const {
  const double x = x_of_xi(xi);
  const double v = -5.0 / (36.0 * xi * xi) + (eval(potential_, x) - lambda_) / x;
  const double theta = y[1] + xi;
  const double s2 = std::sin(2.0 * theta);
  const double c2 = std::cos(2.0 * theta);
  dy[0] = 0.5 * v * s2;
  dy[1] = -0.5 * v * (1.0 - c2);
  dy[2] = v;
  dy[3] = lambda_ / x * c2;
}

std::size_t PruferTrajectory::locate(double xi) const {
  auto it = std::upper_bound(samples_.begin(), samples_.end(), xi,
                             [](double v, const PruferSample& s) { return v < s.xi; });
  if (it == samples_.begin()) return 0;
  return static_cast<std::size_t>(it - samples_.begin()) - 1;
}

PruferSample PruferTrajectory::state_at(double xi) const {
  if (xi < xi0() || xi > xi_end()) {
    throw RangeError("xi=" + std::to_string(xi) + " outside the trajectory [" + std::to_string(xi0()) +
                     ", " + std::to_string(xi_end()) + "]");
  }
  const PruferSample& left = samples_[locate(xi)];
  if (xi == left.xi) return left;
  auto system = [this](double t, const State4& y, State4& dy) { rhs(t, y, dy); };
  const State4 y = ode::AdaptiveIntegrator<4>::advance(system, left.xi, to_state(left), xi - left.xi);
  return to_sample(xi, y);
}

PruferTrajectory integrate_prufer(const PotentialSpec& q, double lambda, const PruferState& start,
                                  double xi_end, double rtol, const TrajectoryOptions& options) {
  if (!(start.xi > 0.0)) throw SingularityError("Prüfer integration needs xi0 > 0");
  if (!(xi_end > start.xi)) throw DomainError("Prüfer integration needs xi_end > xi0");
  check_rtol(rtol);

  PruferTrajectory traj;
  traj.potential_ = q;
  traj.lambda_ = lambda;
  traj.rtol_ = rtol;
  traj.diagnostic_end_ = options.diagnostic_end > 0.0 ? std::min(options.diagnostic_end, xi_end) : xi_end;
  traj.samples_.push_back({start.xi, start.log_r, start.theta, 0.0, 0.0});

  ode::Options opts;
  opts.tolerance = rtol;
  opts.max_step = options.max_step;
  opts.max_step_at = xi_step_cap(q);
  ode::AdaptiveIntegrator<4> integrator(opts);
  State4 y{start.log_r, start.theta - start.xi, 0.0, 0.0};
  auto system = [&traj](double t, const State4& s, State4& ds) { traj.rhs(t, s, ds); };
  const auto stops = xi_stops(q, start.xi, xi_end);
  traj.stats_ = integrator.integrate(
      system, start.xi, y, xi_end, [&](double t, const State4& s) { traj.samples_.push_back(to_sample(t, s)); },
      stops);

  // int V sin(2 theta) accumulated step by step up to the diagnostic end.
  traj.cumulative6_.push_back(0.0);
  for (std::size_t i = 0; i + 1 < traj.samples_.size() && traj.samples_[i].xi < traj.diagnostic_end_; ++i) {
    traj.cumulative6_.push_back(traj.cumulative6_.back() +
                                step_integral6(traj, traj.samples_[i].xi, traj.samples_[i + 1].xi));
  }

  const int per_decade = std::max(1, options.diagnostic_per_decade);
  for (int k = 0;; ++k) {
    double xi = start.xi * std::pow(10.0, static_cast<double>(k) / per_decade);
    const bool last = xi >= traj.diagnostic_end_ * (1.0 - 1e-12);
    if (last) xi = traj.diagnostic_end_;
    traj.diagnostic_.push_back(traj.state_at(xi));
    traj.partials_.push_back({xi, integral6_partial(traj, xi)});
    if (last) break;
  }
  return traj;
}

double integral6_partial(const PruferTrajectory& traj, double n) {
  if (n < traj.xi0() || n > traj.xi_end()) throw RangeError("integral6_partial: N outside the trajectory");
  auto samples = traj.samples();
  auto cumulative = traj.cumulative_integral6();
  const std::size_t i = traj.locate(n);
  std::size_t k = std::min(i, cumulative.size() - 1);
  double value = cumulative[k];
  for (; k < i; ++k) value += step_integral6(traj, samples[k].xi, samples[k + 1].xi);
  return value + step_integral6(traj, samples[i].xi, n);
}

double amplitude_bound(const PruferTrajectory& traj, std::optional<double> limit) {
  auto samples = traj.samples();
  const double base = samples.front().log_r;
  const double lim = limit.value_or(std::numeric_limits<double>::infinity());
  double bound = 0.0;
  for (const auto& s : samples) {
    if (s.xi > lim) break;
    bound = std::max(bound, std::abs(s.log_r - base));
  }
  return bound;
}

ConvergenceVerdict convergence_verdict(std::span<const Integral6Point> partials, double decade,
                                       double tolerance) {
  if (partials.size() < 2) throw RangeError("convergence_verdict needs at least two partials");
  if (!(decade > 1.0)) throw DomainError("convergence_verdict needs decade > 1");
  const double first = partials.front().n;
  const double last = partials.back().n;
  if (!(first > 0.0) || last / first < 100.0 * (1.0 - 1e-12)) {
    throw RangeError("convergence_verdict needs partials covering two decades of N");
  }
  ConvergenceVerdict v;
  const double lo = last / decade;
  double mn = std::numeric_limits<double>::infinity();
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& p : partials) {
    if (p.n < lo * (1.0 - 1e-12)) continue;
    mn = std::min(mn, p.value);
    mx = std::max(mx, p.value);
  }
  v.oscillation = mx - mn;
  v.converged = std::isfinite(v.oscillation) && v.oscillation < tolerance;

  // Oscillation per half-decade window, regressed against the window centre.
  const double width = std::log(decade) / 2.0;
  const double span = std::log(last / first);
  const int windows = std::max(1, static_cast<int>(std::floor(span / width + 1e-9)));
  std::vector<double> centres;
  std::vector<double> oscillations;
  for (int w = 0; w < windows; ++w) {
    const double a = first * std::exp(w * width);
    const double b = first * std::exp((w + 1) * width);
    double wmn = std::numeric_limits<double>::infinity();
    double wmx = -std::numeric_limits<double>::infinity();
    for (const auto& p : partials) {
      if (p.n < a * (1.0 - 1e-12) || p.n > b * (1.0 + 1e-12)) continue;
      wmn = std::min(wmn, p.value);
      wmx = std::max(wmx, p.value);
    }
    if (wmx > wmn) {
      centres.push_back(std::sqrt(a * b));
      oscillations.push_back(wmx - wmn);
    }
  }
  v.rate_slope = fit_loglog(centres, oscillations).slope;
  return v;
}

SigmaGammaPoint sigma_gamma_at(const PruferTrajectory& traj, const PruferSample& s) {
  const double sigma = sigma_of(s);
  return {s.xi, sigma, 2.0 * s.theta - sigma, b_term(traj.potential(), s.xi)};
}

std::vector<SigmaGammaPoint> sigma_gamma(const PruferTrajectory& traj) {
  std::vector<SigmaGammaPoint> out;
  out.reserve(traj.samples().size());
  for (const auto& s : traj.samples()) out.push_back(sigma_gamma_at(traj, s));
  return out;
}

double gamma_residual(const PruferTrajectory& traj, double fd_step) {
  if (!(fd_step > 0.0)) throw DomainError("gamma_residual needs fd_step > 0");
  double worst = 0.0;
  const double k = max_wavenumber(traj.potential());
  auto samples = traj.samples();
  auto gamma = [&traj](double xi) { return sigma_gamma_at(traj, traj.state_at(xi)).gamma; };
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const double xi = samples[i].xi;
    // The difference step also has to resolve the fastest term of q.
    const double h = k > 0.0 ? std::min(fd_step, 0.02 * std::sqrt(x_of_xi(xi)) / k) : fd_step;
    if (xi - 2.0 * h < traj.xi0() || xi + 2.0 * h > traj.xi_end()) continue;
    // Fourth-order central difference; gamma is a difference of two O(xi) phases.
    const double slope =
        (gamma(xi - 2.0 * h) - 8.0 * gamma(xi - h) + 8.0 * gamma(xi + h) - gamma(xi + 2.0 * h)) / (12.0 * h);
    const double b = b_term(traj.potential(), xi);
    const double rhs = b * std::cos(2.0 * samples[i].theta);
    worst = std::max(worst, std::abs(slope - rhs) / (1.0 + std::abs(b)));
  }
  return worst;
}

std::vector<DecayingControl> control_decaying_profile(const PruferTrajectory& traj,
                                                      std::span<const double> xis) {
  const PotentialSpec& q = traj.potential();
  const double lambda = traj.lambda();
  auto amplitude = [&](const PruferSample& s) { return std::complex<double>(b_term(q, s.xi), 0.0); };
  auto slope = [&](const PruferSample& s) {
    return 2.0 - effective_potential(q, s.xi, lambda) - lambda_term(s.xi, lambda) * std::cos(2.0 * s.theta);
  };
  const auto tails = tails_at(traj, xis, amplitude, sigma_of, slope);
  const PruferSample end = traj.samples().back();
  const double remainder = std::abs(b_term(q, end.xi)) / std::max(std::abs(slope(end)), 1e-300);
  std::vector<DecayingControl> out;
  out.reserve(xis.size());
  for (std::size_t k = 0; k < xis.size(); ++k) {
    DecayingControl c;
    c.xi = xis[k];
    c.tail = tails[k];
    c.truncation_error = remainder;
    c.control = std::abs(b_term(q, xis[k])) * std::norm(tails[k]);
    c.reliable = remainder <= 0.5 * std::abs(tails[k]);
    out.push_back(c);
  }
  return out;
}

std::vector<SmoothControl> control_smooth_profile(const PruferTrajectory& traj, std::span<const double> xis) {
  const PotentialSpec& q = traj.potential();
  const double lambda = traj.lambda();
  auto amplitude = [&](const PruferSample& s) {
    return std::complex<double>(effective_potential(q, s.xi, lambda), 0.0);
  };
  auto phase = [](const PruferSample& s) { return 2.0 * s.xi - s.v_integral; };
  auto slope = [&](const PruferSample& s) { return 2.0 - effective_potential(q, s.xi, lambda); };
  const auto tails = tails_at(traj, xis, amplitude, phase, slope);
  const PruferSample end = traj.samples().back();
  const double remainder =
      std::abs(effective_potential(q, end.xi, lambda)) / std::max(std::abs(slope(end)), 1e-300);
  std::vector<SmoothControl> out;
  out.reserve(xis.size());
  for (std::size_t k = 0; k < xis.size(); ++k) {
    SmoothControl c;
    c.xi = xis[k];
    c.w_plus = tails[k];
    c.w_minus = std::conj(tails[k]);  // V is real
    c.truncation_error = remainder;
    const double w = std::max(std::abs(c.w_plus), std::abs(c.w_minus));
    c.control = std::abs(effective_potential(q, xis[k], lambda)) * w * w;
    c.reliable = remainder <= 0.5 * w;
    out.push_back(c);
  }
  return out;
}

DecayingControl control_decaying(const PruferTrajectory& traj, double xi) {
  const double xs[] = {xi};
  const DecayingControl c = control_decaying_profile(traj, xs).front();
  if (!c.reliable) {
    throw UnreliableTailError("decaying control tail at xi=" + std::to_string(xi) +
                              " is dominated by its truncation estimate");
  }
  return c;
}

SmoothControl control_smooth(const PruferTrajectory& traj, double xi) {
  const double xs[] = {xi};
  const SmoothControl c = control_smooth_profile(traj, xs).front();
  if (!c.reliable) {
    throw UnreliableTailError("smooth control tail at xi=" + std::to_string(xi) +
                              " is dominated by its truncation estimate");
  }
  return c;
}

std::vector<double> diagnostic_points(const PruferTrajectory& traj, double lo, double hi) {
  std::vector<double> out;
  for (const auto& s : traj.diagnostic_grid()) {
    if (s.xi >= lo * (1.0 - 1e-12) && s.xi <= hi * (1.0 + 1e-12)) out.push_back(s.xi);
  }
  return out;
}

}  // namespace stark
