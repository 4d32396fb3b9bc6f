#pragma once

#include "stark/potentials.hpp"

namespace stark {

/// Liouville change of variables for the linear Stark potential -x:
///   xi = (2/3) x^(3/2),   x = c xi^(2/3),   c = (3/2)^(2/3),
///   omega(xi) = x^(1/4) u(x).
/// The transformed function solves -omega'' + V(xi, lambda) omega = omega.
struct LiouvilleMap {
  static constexpr double c = 1.3103706971044482;  // (3/2)^(2/3)
};

double xi_of_x(double x);
double x_of_xi(double xi);

/// Sign of the inverse-square term. Transforming -u'' - x u exactly gives
/// -5/(36 xi^2) (the Airy functions map to xi^(1/2) J_{+-1/3}(xi)); the
/// `positive` form is kept only to reproduce published formulas literally.
enum class InverseSquare { derived, positive };

/// +-5/(36 xi^2) according to `term`.
double inverse_square(double xi, InverseSquare term = InverseSquare::derived);

/// V(xi, lambda) = -5/(36 xi^2) + (q(c xi^(2/3)) - lambda) / (c xi^(2/3)).
double effective_potential(const PotentialSpec& q, double xi, double lambda,
                           InverseSquare term = InverseSquare::derived);

/// b(xi) = -5/(36 xi^2) + q(c xi^(2/3)) / (c xi^(2/3)); the lambda-free part,
/// so that V = b - lambda_term(xi, lambda).
double b_term(const PotentialSpec& q, double xi, InverseSquare term = InverseSquare::derived);

/// lambda / (c xi^(2/3)).
double lambda_term(double xi, double lambda);

/// Pair of a function value and its derivative.
struct Phase2 {
  double value;
  double slope;
};

/// (u, du/dx) at x  ->  (omega, d omega/d xi) at xi(x).
Phase2 push_solution(double u, double du, double x);

/// (omega, d omega/d xi) at xi  ->  (u, du/dx) at x(xi).
Phase2 pull_solution(double omega, double domega, double xi);

}  // namespace stark
