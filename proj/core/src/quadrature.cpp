#include "stark/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

namespace stark::quad {
namespace {

GaussRule build_rule(unsigned n) {
  GaussRule rule;
  const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(static_cast<int>(n));
  std::vector<double> nodes;
  for (double z : zeros) {
    nodes.push_back(z);
    if (z != 0.0) nodes.push_back(-z);
  }
  std::sort(nodes.begin(), nodes.end());
  rule.size = nodes.size();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double x = nodes[i];
    const double dp = boost::math::legendre_p_prime(static_cast<int>(n), x);
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

std::array<GaussRule, 17> build_all() {
  std::array<GaussRule, 17> rules{};
  for (unsigned n = 1; n <= 16; ++n) rules[n] = build_rule(n);
  return rules;
}

}  // namespace

const GaussRule& gauss_rule(std::size_t n) {
  static const std::array<GaussRule, 17> rules = build_all();
  if (n < 1 || n > 16) throw std::out_of_range("gauss_rule supports 1..16 nodes");
  return rules[n];
}

namespace detail {
void legendre_values(double t, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = t;
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    out[k + 1] = ((2.0 * k + 1.0) * t * out[k] - static_cast<double>(k) * out[k - 1]) / (k + 1.0);
  }
}
}  // namespace detail

void legendre_exponential_moments(double k, std::span<std::complex<double>> out) {
  // Panel sweeps usually repeat the same k up to rounding; keep the last set.
  constexpr std::size_t kCached = 16;
  thread_local double cached_k = std::numeric_limits<double>::quiet_NaN();
  thread_local std::size_t cached_count = 0;
  thread_local std::array<std::complex<double>, kCached> cached{};
  if (out.size() <= cached_count && std::abs(k - cached_k) <= 1e-15 * std::abs(k)) {
    std::copy_n(cached.begin(), out.size(), out.begin());
    return;
  }
  const double ak = std::abs(k);
  // i^n cycles through 1, i, -1, -i; j_n(-k) = (-1)^n j_n(k).
  static const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  // Upward recurrence is stable once the argument exceeds the order; below
  // that the library routine is used (it rejects large arguments).
  const bool upward = ak > 2.0 * static_cast<double>(out.size());
  double jm1 = 0.0;
  double j0 = 0.0;
  if (upward) {
    jm1 = std::cos(ak) / ak;  // j_{-1}
    j0 = std::sin(ak) / ak;
  }
  for (std::size_t n = 0; n < out.size(); ++n) {
    double j;
    if (upward) {
      j = j0;
      const double next = (2.0 * n + 1.0) / ak * j0 - jm1;
      jm1 = j0;
      j0 = next;
    } else {
      j = ak == 0.0 ? (n == 0 ? 1.0 : 0.0) : std::sph_bessel(static_cast<unsigned>(n), ak);
    }
    if (k < 0.0 && (n % 2 == 1)) j = -j;
    out[n] = 2.0 * j * ipow[n % 4];
  }
  if (out.size() <= kCached) {
    cached_k = k;
    cached_count = out.size();
    std::copy(out.begin(), out.end(), cached.begin());
  }
}

double hermite_cubic(double x0, double y0, double d0, double x1, double y1, double d1, double x) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

double hermite_quintic_step(double h, double f0, double d0, double s0, double f1, double d1, double s1) {
  return 0.5 * h * (f0 + f1) + h * h / 10.0 * (d0 - d1) + h * h * h / 120.0 * (s0 + s1);
}

}  // namespace stark::quad
