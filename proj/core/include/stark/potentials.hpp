#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stark {

enum class Family { zero, power_law, resonant, weierstrass_smooth, tabulated };

std::string_view to_string(Family family);

/// A tabulated sample (x, q(x)).
struct TabulatedPoint {
  double x;
  double q;
};

/// Description of a perturbation q(x) on the half-line x >= 0.
///
/// Families:
///   power_law           q(x) = A (1+x)^(-beta)
///   resonant            q(x) = A (1+x)^(-decay) sin((4/3) x^(3/2) + phase)
///   weierstrass_smooth  q(x) = sum_{k=0..K} 2^(-(alpha+1)k) sin(2^k x)
///   tabulated           linear interpolation of strictly increasing samples
///
/// Instances are built through the factory functions below, which validate
/// the parameters; a constructed spec is never mutated afterwards.
struct PotentialSpec {
  Family family = Family::zero;
  double amplitude = 0.0;
  double decay_exponent = 0.0;   // power_law beta
  double resonant_phase = 0.0;
  double resonant_decay = 0.5;
  double holder_alpha = 0.5;
  int term_count = 8;
  std::vector<TabulatedPoint> samples;

  static PotentialSpec zero();
  static PotentialSpec power_law(double amplitude, double beta);
  static PotentialSpec resonant(double amplitude, double phase = 1.5707963267948966,
                                double decay = 0.5);
  static PotentialSpec weierstrass_smooth(double alpha, int terms = 8);
  static PotentialSpec tabulated(std::vector<TabulatedPoint> samples);

  /// True when |q(x)| <= C(1+x)^(-1/3-eps) for some eps > 0 is guaranteed by
  /// construction (the decaying-perturbation regime).
  bool decay_hypothesis() const;

  /// True when q is bounded with bounded Hölder-continuous derivative.
  bool smoothness_hypothesis() const;
};

double eval(const PotentialSpec& spec, double x);

/// Closed form for analytic families; central difference with `fd_step` for
/// tabulated potentials (required there).
double eval_derivative(const PotentialSpec& spec, double x,
                       std::optional<double> fd_step = std::nullopt);

/// Largest angular frequency of q in x (2^K for weierstrass_smooth, 0 for
/// families without fixed oscillation). Integrators cap their steps by it.
double max_wavenumber(const PotentialSpec& spec);

/// Interior points of (lo, hi) where q' jumps (the knots of a tabulated
/// potential), increasing. Integrators stop on them.
std::vector<double> derivative_jumps(const PotentialSpec& spec, double lo, double hi);

/// Bounds sup|q| and sup|q'| of a weierstrass_smooth spec, from (alpha, K).
struct WeierstrassBounds {
  double sup_q;
  double sup_derivative;
};
WeierstrassBounds weierstrass_bounds(double alpha, int terms);

struct DecayCheck {
  bool holds;
  double best_constant;
};

/// sup over `grid` of |q(x)|(1+x)^beta. `holds` requires the envelope to be
/// finite and not to reach a new maximum over the last decade of the grid.
DecayCheck verify_decay(const PotentialSpec& spec, double beta, std::span<const double> grid);

/// Empirical Hölder constant of q': max over grid x h_grid of
/// |q'(x+h) - q'(x)| / h^alpha.
double verify_holder(const PotentialSpec& spec, double alpha, std::span<const double> grid,
                     std::span<const double> h_grid);

// Preset registry -------------------------------------------------------------

struct PresetInfo {
  std::string name;
  std::string parameters;  // "A=1,beta=0.5"
  std::string formula;
};

std::vector<PresetInfo> presets();

/// Builds a spec from a preset name and parameter map; missing parameters
/// fall back to the preset defaults. Throws DomainError on unknown names or
/// parameters. `tabulated` needs a "file" entry pointing to a CSV.
PotentialSpec make_potential(std::string_view name, const std::map<std::string, std::string>& params);

/// Parses the registry syntax `power_law{A=1,beta=0.5}` (braces optional).
PotentialSpec parse_potential(std::string_view text);

/// Canonical registry string; parse_potential(describe(s)) reproduces s for
/// the analytic families.
std::string describe(const PotentialSpec& spec);

/// Two-column CSV (x, q); '#' comments and a non-numeric header are skipped.
std::vector<TabulatedPoint> load_tabulated_csv(const std::string& path);

}  // namespace stark
