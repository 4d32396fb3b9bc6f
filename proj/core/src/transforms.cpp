#include "stark/transforms.hpp"

#include <cmath>

#include "stark/errors.hpp"

namespace stark {

namespace {
constexpr double kFiveOver36 = 5.0 / 36.0;

void require_positive_xi(double xi) {
  if (!(xi > 0.0)) throw SingularityError("transformed equation is singular at xi = 0");
}
}  // namespace

double xi_of_x(double x) {
  if (!(x >= 0.0)) throw DomainError("xi_of_x needs x >= 0");
  return (2.0 / 3.0) * x * std::sqrt(x);
}

double x_of_xi(double xi) {
  if (!(xi >= 0.0)) throw DomainError("x_of_xi needs xi >= 0");
  return std::cbrt(1.5 * xi * 1.5 * xi);
}

double inverse_square(double xi, InverseSquare term) {
  require_positive_xi(xi);
  const double v = kFiveOver36 / (xi * xi);
  return term == InverseSquare::derived ? -v : v;
}

double effective_potential(const PotentialSpec& q, double xi, double lambda, InverseSquare term) {
  const double x = x_of_xi(xi);
  return inverse_square(xi, term) + (eval(q, x) - lambda) / x;
}

double b_term(const PotentialSpec& q, double xi, InverseSquare term) {
  const double x = x_of_xi(xi);
  return inverse_square(xi, term) + eval(q, x) / x;
}

double lambda_term(double xi, double lambda) {
  require_positive_xi(xi);
  return lambda / x_of_xi(xi);
}

Phase2 push_solution(double u, double du, double x) {
  if (!(x > 0.0)) throw SingularityError("push_solution needs x > 0");
  const double q4 = std::pow(x, 0.25);
  // d omega/d xi = (d omega/dx)(dx/d xi), dx/d xi = x^(-1/2)
  return {q4 * u, 0.25 * u / (x * q4) + du / q4};
}

Phase2 pull_solution(double omega, double domega, double xi) {
  require_positive_xi(xi);
  const double x = x_of_xi(xi);
  const double q4 = std::pow(x, 0.25);
  const double u = omega / q4;
  return {u, q4 * (domega - 0.25 * u / (x * q4))};
}

}  // namespace stark
