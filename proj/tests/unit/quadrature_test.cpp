#include <cmath>
#include <complex>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <gtest/gtest.h>

#include "stark/fit.hpp"
#include "stark/quadrature.hpp"

using namespace stark;
using cd = std::complex<double>;

TEST(Gauss, ExactForPolynomialsOfDegreeBelowTwoN) {
  for (std::size_t n = 1; n <= 16; ++n) {
    for (std::size_t d = 0; d < 2 * n; ++d) {
      const double got = quad::gauss([d](double x) { return std::pow(x, double(d)); }, 0.0, 2.0, n);
      const double want = std::pow(2.0, double(d + 1)) / double(d + 1);
      EXPECT_NEAR(got, want, 1e-13 * want) << "n=" << n << " d=" << d;
    }
  }
  EXPECT_THROW(quad::gauss_rule(0), std::exception);
  EXPECT_THROW(quad::gauss_rule(17), std::exception);
}

TEST(Moments, MatchBruteForceAcrossFrequencies) {
  constexpr std::size_t n = 12;
  for (double k : {0.0, 1e-9, 1e-3, 0.5, 3.0, 17.0, 60.0, 400.0, -25.0}) {
    std::array<cd, n> m{};
    quad::legendre_exponential_moments(k, m);
    for (std::size_t j = 0; j < n; ++j) {
      auto re = [&](double t) { return boost::math::legendre_p(int(j), t) * std::cos(k * t); };
      auto im = [&](double t) { return boost::math::legendre_p(int(j), t) * std::sin(k * t); };
      const double r = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(re, -1.0, 1.0, 15, 1e-14);
      const double i = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(im, -1.0, 1.0, 15, 1e-14);
      EXPECT_NEAR(m[j].real(), r, 1e-12) << "k=" << k << " n=" << j;
      EXPECT_NEAR(m[j].imag(), i, 1e-12) << "k=" << k << " n=" << j;
    }
  }
}

TEST(Moments, RepeatedFrequencyGivesIdenticalValues) {
  std::array<cd, 12> a{}, b{}, c{};
  quad::legendre_exponential_moments(123.456, a);
  quad::legendre_exponential_moments(0.25, c);
  quad::legendre_exponential_moments(123.456, b);
  EXPECT_EQ(a, b);
}

TEST(Filon, ExactForCubicAmplitudeAtAnyFrequency) {
  // int_0^2 x^3 e^{i k x} dx: closed form for large k, Gauss-Kronrod where the
  // closed form cancels.
  auto exact = [](double k) {
    if (k < 1.0) {
      auto re = [k](double x) { return x * x * x * std::cos(k * x); };
      auto im = [k](double x) { return x * x * x * std::sin(k * x); };
      using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
      return cd(GK::integrate(re, 0.0, 2.0, 15, 1e-15), GK::integrate(im, 0.0, 2.0, 15, 1e-15));
    }
    const cd i(0, 1);
    auto prim = [&](double x) {
      return std::exp(i * k * x) *
             (std::pow(x, 3) / (i * k) - 3.0 * x * x / std::pow(i * k, 2) + 6.0 * x / std::pow(i * k, 3) -
              6.0 / std::pow(i * k, 4));
    };
    return prim(2.0) - prim(0.0);
  };
  for (double k : {0.01, 1.0, 10.0, 300.0, 5000.0}) {
    auto sample = [k](double x) { return quad::OscillatorySample{cd(x * x * x), k * x}; };
    const cd got = quad::filon_panel(sample, 0.0, 2.0, k);
    const cd want = exact(k);
    EXPECT_LT(std::abs(got - want), 1e-10 * std::max(1.0, std::abs(want))) << "k=" << k;
  }
}

TEST(Filon, CurvedPhaseOnSmallPanel) {
  // exp(i x^2) on [10, 10.2]: curvature is resolved by the residual factor.
  auto sample = [](double x) { return quad::OscillatorySample{cd(1.0), x * x}; };
  const cd got = quad::filon_panel(sample, 10.0, 10.2, 2.0 * 10.1);
  auto re = [](double x) { return std::cos(x * x); };
  auto im = [](double x) { return std::sin(x * x); };
  const double r = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(re, 10.0, 10.2, 15, 1e-15);
  const double i = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(im, 10.0, 10.2, 15, 1e-15);
  EXPECT_NEAR(got.real(), r, 1e-13);
  EXPECT_NEAR(got.imag(), i, 1e-13);
}

TEST(Hermite, QuinticStepExactForQuintics) {
  auto f = [](double x) { return 1 - 2 * x + 3 * x * x - x * x * x + 0.5 * std::pow(x, 4) - 0.25 * std::pow(x, 5); };
  auto d = [](double x) { return -2 + 6 * x - 3 * x * x + 2 * std::pow(x, 3) - 1.25 * std::pow(x, 4); };
  auto s = [](double x) { return 6 - 6 * x + 6 * x * x - 5 * std::pow(x, 3); };
  auto prim = [](double x) {
    return x - x * x + std::pow(x, 3) - 0.25 * std::pow(x, 4) + 0.1 * std::pow(x, 5) - std::pow(x, 6) / 24.0;
  };
  const double a = 0.3, b = 1.1;
  EXPECT_NEAR(quad::hermite_quintic_step(b - a, f(a), d(a), s(a), f(b), d(b), s(b)), prim(b) - prim(a), 1e-14);
}

TEST(Hermite, CubicInterpolatesCubics) {
  auto f = [](double x) { return 2 * x * x * x - x + 0.5; };
  auto d = [](double x) { return 6 * x * x - 1; };
  for (double x = 0.0; x <= 1.0; x += 0.125) {
    EXPECT_NEAR(quad::hermite_cubic(0.0, f(0), d(0), 1.0, f(1), d(1), x), f(x), 1e-14);
  }
}

TEST(Fit, LineAndPowerLaw) {
  std::vector<double> x, y, p;
  for (int i = 1; i <= 20; ++i) {
    x.push_back(i);
    y.push_back(3.0 * i - 2.0);
    p.push_back(5.0 * std::pow(i, -0.75));
  }
  const auto line = fit_line(x, y);
  EXPECT_NEAR(line.slope, 3.0, 1e-13);
  EXPECT_NEAR(line.intercept, -2.0, 1e-12);
  EXPECT_EQ(line.points, 20u);
  const auto power = fit_loglog(x, p);
  EXPECT_NEAR(power.slope, -0.75, 1e-13);
  EXPECT_NEAR(std::exp(power.intercept), 5.0, 1e-12);
  EXPECT_TRUE(std::isnan(fit_line(std::span(x).first(1), std::span(y).first(1)).slope));
}

TEST(Fit, LogLogSkipsNonPositiveEntries) {
  const std::vector<double> x{1, 2, 4, 8, 16};
  const std::vector<double> y{1, 0.0, 0.25, -1.0, 1.0 / 16};
  const auto f = fit_loglog(x, y);
  EXPECT_EQ(f.points, 3u);
  EXPECT_NEAR(f.slope, -1.0, 1e-13);
}

TEST(Fit, EnvelopeFollowsPeaks) {
  std::vector<double> x, y;
  for (int i = 0; i < 400; ++i) {
    const double t = std::pow(10.0, 1.0 + i / 100.0);
    x.push_back(t);
    y.push_back(std::pow(t, -1.5) * (1.0 + std::sin(0.7 * t)) + 1e-30);
  }
  EXPECT_NEAR(fit_loglog_envelope(x, y, 20).slope, -1.5, 0.1);
}
