#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "stark/errors.hpp"

namespace stark::ode {

struct StepStats {
  double min_step = std::numeric_limits<double>::infinity();
  double max_step = 0.0;
  double mean_step = 0.0;
  long accepted = 0;
  long rejected = 0;
};

struct Options {
  /// Local error allowed per unit of the independent variable.
  double tolerance = 1e-12;
  double max_step = 0.7853981633974483;  // pi/4
  /// Optional position-dependent cap, applied on top of max_step.
  std::function<double(double)> max_step_at;
  double initial_step = 1e-3;
  /// A step below underflow * max(1, |t|) is reported as a StiffnessError.
  double underflow = 1e-12;
};

/// Adaptive Runge-Kutta-Fehlberg 7(8) driver with absolute error control per
/// unit step. The stepper itself comes from Boost.Odeint; step selection,
/// stop points and failure reporting live here.
template <std::size_t N>
class AdaptiveIntegrator {
 public:
  using State = std::array<double, N>;
  using Stepper = boost::numeric::odeint::runge_kutta_fehlberg78<State>;

  explicit AdaptiveIntegrator(Options options) : options_(options) {}

  const Options& options() const { return options_; }

  /// Integrates y from t0 to t1 (t1 > t0). `on_step(t, y)` is called after
  /// every accepted step. Every entry of `stops` inside (t0, t1) is hit
  /// exactly. Returns step statistics; throws StiffnessError on underflow.
  template <class System, class OnStep>
  StepStats integrate(System&& system, double t0, State& y, double t1, OnStep&& on_step,
                      std::span<const double> stops = {}) {
    StepStats stats;
    Stepper stepper;
    auto rhs = [&system](const State& s, State& ds, double t) { system(t, s, ds); };
    double t = t0;
    double h = std::min({options_.initial_step, options_.max_step, t1 - t0});
    std::size_t next_stop = 0;
    while (next_stop < stops.size() && stops[next_stop] <= t0) ++next_stop;
    double total = 0.0;
    while (t < t1) {
      double target = t1;
      while (next_stop < stops.size() && stops[next_stop] <= t) ++next_stop;
      if (next_stop < stops.size() && stops[next_stop] < target) target = stops[next_stop];
      if (options_.max_step_at) h = std::min(h, options_.max_step_at(t));
      const double remaining = target - t;
      const bool clipped = h >= remaining;
      // Step by the representable increment so t does not drift from the
      // length the stepper actually integrated over.
      const double next = clipped ? target : t + h;
      const double step = next - t;
      State trial = y;
      State err{};
      stepper.do_step(rhs, trial, t, step, err);
      double norm = 0.0;
      for (std::size_t i = 0; i < N; ++i) norm = std::max(norm, std::abs(err[i]));
      norm /= options_.tolerance * step;
      if (!std::isfinite(norm)) norm = 1e10;
      if (norm <= 1.0) {
        t = next;
        y = trial;
        ++stats.accepted;
        stats.min_step = std::min(stats.min_step, step);
        stats.max_step = std::max(stats.max_step, step);
        total += step;
        on_step(t, static_cast<const State&>(y));
        const double grow = norm > 0.0 ? 0.9 * std::pow(norm, -1.0 / 8.0) : 5.0;
        // A step shortened to land on a stop point says nothing about the
        // attainable step length; keep the previous proposal in that case.
        const double proposal = step * std::min(5.0, grow);
        h = clipped ? std::max(h, proposal) : proposal;
        h = std::min(h, options_.max_step);
      } else {
        ++stats.rejected;
        h = step * std::max(0.2, 0.9 * std::pow(norm, -1.0 / 8.0));
        if (h < options_.underflow * std::max(1.0, std::abs(t))) {
          throw StiffnessError("step size underflow at t=" + std::to_string(t) +
                                   " (h=" + std::to_string(h) + ")",
                               t, h, stats.accepted, stats.rejected);
        }
      }
    }
    stats.mean_step = stats.accepted > 0 ? total / static_cast<double>(stats.accepted) : 0.0;
    if (stats.accepted == 0) stats.min_step = 0.0;
    return stats;
  }

  /// Single error-free step of length dt from (t, y); used as dense output
  /// inside an already accepted step.
  template <class System>
  static State advance(System&& system, double t, State y, double dt) {
    if (dt == 0.0) return y;
    Stepper stepper;
    auto rhs = [&system](const State& s, State& ds, double tt) { system(tt, s, ds); };
    stepper.do_step(rhs, y, t, dt);
    return y;
  }

 private:
  Options options_;
};

}  // namespace stark::ode
