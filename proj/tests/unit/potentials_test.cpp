#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "stark/errors.hpp"
#include "stark/potentials.hpp"

using namespace stark;

namespace {

std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i <= n; ++i) g.push_back(lo + (hi - lo) * i / n);
  return g;
}

std::vector<double> log_grid(double hi, int per_decade) {
  std::vector<double> g{0.0};
  for (int k = 0; std::pow(10.0, double(k) / per_decade) <= hi * (1 + 1e-12); ++k) {
    g.push_back(std::pow(10.0, double(k) / per_decade) - 1.0 + 1e-3);
  }
  return g;
}

std::vector<double> dyadic(int levels) {
  std::vector<double> h;
  for (int j = 0; j <= levels; ++j) h.push_back(std::ldexp(1.0, -j));
  return h;
}

}  // namespace

TEST(Eval, ClosedForms) {
  EXPECT_EQ(eval(PotentialSpec::zero(), 5.0), 0.0);
  EXPECT_DOUBLE_EQ(eval(PotentialSpec::power_law(1.0, 0.5), 3.0), 0.5);
  EXPECT_EQ(eval(PotentialSpec::weierstrass_smooth(0.5, 8), 0.0), 0.0);
  const auto r = PotentialSpec::resonant(2.0, 0.3, 0.5);
  const double x = 2.5;
  EXPECT_NEAR(eval(r, x), 2.0 / std::sqrt(1.0 + x) * std::sin(4.0 / 3.0 * std::pow(x, 1.5) + 0.3), 1e-15);
}

TEST(Eval, NegativeArgumentIsADomainError) {
  EXPECT_THROW(eval(PotentialSpec::zero(), -1.0), DomainError);
  EXPECT_THROW(eval_derivative(PotentialSpec::power_law(1, 0.5), -0.5), DomainError);
}

TEST(Eval, PowerLawEnvelopeIsExactlyA) {
  const auto q = PotentialSpec::power_law(1.7, 0.6);
  for (double x : log_grid(1e6, 7)) EXPECT_NEAR(eval(q, x) * std::pow(1 + x, 0.6), 1.7, 1e-13);
}

TEST(Derivative, ClosedForms) {
  EXPECT_EQ(eval_derivative(PotentialSpec::zero(), 1.0), 0.0);
  EXPECT_DOUBLE_EQ(eval_derivative(PotentialSpec::power_law(1.0, 0.5), 0.0), -0.5);
  double sum = 0.0;
  for (int k = 0; k <= 8; ++k) sum += std::pow(2.0, -0.5 * k);
  EXPECT_NEAR(eval_derivative(PotentialSpec::weierstrass_smooth(0.5, 8), 0.0), sum, 1e-14);
  EXPECT_NEAR(sum, 3.2633, 1e-4);
}

TEST(Derivative, MatchesCentralDifference) {
  const PotentialSpec specs[] = {PotentialSpec::power_law(1, 0.5), PotentialSpec::resonant(1),
                                 PotentialSpec::weierstrass_smooth(0.5, 8), PotentialSpec::power_law(-3, 1.2)};
  const double h = 1e-5;
  for (const auto& q : specs) {
    for (double x : {0.3, 1.0, 2.7, 9.5, 31.0}) {
      const double fd = (eval(q, x + h) - eval(q, x - h)) / (2 * h);
      const double exact = eval_derivative(q, x);
      // The weierstrass K=8 term oscillates at frequency 256, so the stencil
      // error is h^2 * 256^3 / 6 relative to a derivative of order one.
      const double scale = std::max(std::abs(exact), 1e-3);
      const double tol = q.family == Family::weierstrass_smooth ? 5e-3 : 1e-6;
      EXPECT_LE(std::abs(fd - exact) / scale, tol) << describe(q) << " x=" << x;
    }
  }
}

TEST(Derivative, WeierstrassCentralDifferenceAtFineStep) {
  const auto q = PotentialSpec::weierstrass_smooth(0.5, 8);
  const double h = 1e-7;
  for (double x : {0.3, 1.0, 2.7, 9.5}) {
    const double fd = (eval(q, x + h) - eval(q, x - h)) / (2 * h);
    EXPECT_NEAR(fd, eval_derivative(q, x), 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Weierstrass, BoundsHoldOnGrid) {
  for (double alpha : {0.25, 0.5, 1.0}) {
    const auto q = PotentialSpec::weierstrass_smooth(alpha, 8);
    const auto b = weierstrass_bounds(alpha, 8);
    double sq = 0.0;
    double sd = 0.0;
    for (int k = 0; k <= 8; ++k) {
      sq += std::pow(2.0, -(alpha + 1) * k);
      sd += std::pow(2.0, -alpha * k);
    }
    EXPECT_NEAR(b.sup_q, sq, 1e-14);
    EXPECT_NEAR(b.sup_derivative, sd, 1e-14);
    for (double x : linear_grid(0.0, 50.0, 20000)) {
      EXPECT_LE(std::abs(eval(q, x)), b.sup_q + 1e-14);
      EXPECT_LE(std::abs(eval_derivative(q, x)), b.sup_derivative + 1e-14);
    }
  }
}

TEST(VerifyDecay, Examples) {
  const auto grid = log_grid(1e4, 50);
  const auto pl = verify_decay(PotentialSpec::power_law(2.0, 0.5), 0.5, grid);
  EXPECT_TRUE(pl.holds);
  EXPECT_NEAR(pl.best_constant, 2.0, 1e-12);

  const auto z = verify_decay(PotentialSpec::zero(), 1.0, grid);
  EXPECT_TRUE(z.holds);
  EXPECT_EQ(z.best_constant, 0.0);

  auto dense = linear_grid(0.0, 1e4, 200000);
  const auto r = verify_decay(PotentialSpec::resonant(1.0), 0.34, dense);
  EXPECT_TRUE(r.holds);
  EXPECT_LE(r.best_constant, 1.0 + 1e-12);
  EXPECT_GT(r.best_constant, 0.9);
}

TEST(VerifyDecay, SlowerDecayThanClaimedFails) {
  const auto check = verify_decay(PotentialSpec::power_law(1.0, 0.3), 0.5, log_grid(1e4, 20));
  EXPECT_FALSE(check.holds);
}

TEST(VerifyHolder, Examples) {
  const auto grid = linear_grid(0.0, 100.0, 2000);
  const auto h = dyadic(20);
  EXPECT_EQ(verify_holder(PotentialSpec::zero(), 0.5, grid, h), 0.0);
  const double lip = verify_holder(PotentialSpec::power_law(1.0, 0.5), 1.0, grid, h);
  EXPECT_LE(lip, 0.75);
  EXPECT_GT(lip, 0.5);
}

// Sup over h of the Hölder quotient at the critical exponent: the K-th term
// adds a contribution of size about 2^(-K/2) at h ~ 2^-K, so the constant
// converges geometrically in K.
TEST(VerifyHolder, WeierstrassConstantStabilizesInK) {
  const auto grid = linear_grid(0.0, 10 * M_PI, 4000);
  const auto h = dyadic(24);
  std::vector<double> c;
  for (int k : {4, 6, 8, 10, 12}) c.push_back(verify_holder(PotentialSpec::weierstrass_smooth(0.5, k), 0.5, grid, h));
  for (double v : c) EXPECT_TRUE(std::isfinite(v));
  EXPECT_LE(std::abs(c[2] - c[4]) / c[4], 0.10);
  EXPECT_LT(c[3] - c[2], c[2] - c[1]);
  EXPECT_LT(c[4] - c[3], c[3] - c[2]);
}

TEST(VerifyHolder, ExponentBelowAlphaStaysBoundedAboveAlphaGrows) {
  const auto grid = linear_grid(0.0, 10 * M_PI, 4000);
  const auto h = dyadic(24);
  auto constant = [&](double test_alpha, int k) {
    return verify_holder(PotentialSpec::weierstrass_smooth(0.5, k), test_alpha, grid, h);
  };
  const double lo4 = constant(0.3, 4), lo6 = constant(0.3, 6), lo8 = constant(0.3, 8);
  EXPECT_LE(lo8 / lo6, 1.10);
  EXPECT_LE(lo6 / lo4, 1.10);
  const double hi4 = constant(0.7, 4), hi6 = constant(0.7, 6), hi8 = constant(0.7, 8);
  const double expected = std::pow(2.0, 0.2 * 2);
  EXPECT_NEAR(hi6 / hi4, expected, 0.2 * expected);
  EXPECT_NEAR(hi8 / hi6, expected, 0.2 * expected);
}

TEST(Factories, RejectInvalidParameters) {
  EXPECT_THROW(PotentialSpec::power_law(1.0, -0.1), DomainError);
  EXPECT_THROW(PotentialSpec::weierstrass_smooth(0.0, 8), DomainError);
  EXPECT_THROW(PotentialSpec::weierstrass_smooth(0.5, 0), DomainError);
  EXPECT_THROW(PotentialSpec::tabulated({{0.0, 1.0}, {0.0, 2.0}}), DomainError);
  EXPECT_THROW(PotentialSpec::tabulated({{0.0, 1.0}}), DomainError);
}

TEST(Hypotheses, Flags) {
  EXPECT_TRUE(PotentialSpec::power_law(1, 0.5).decay_hypothesis());
  EXPECT_FALSE(PotentialSpec::power_law(1, 1.0 / 3.0).decay_hypothesis());
  EXPECT_TRUE(PotentialSpec::weierstrass_smooth(0.5).smoothness_hypothesis());
  EXPECT_FALSE(PotentialSpec::weierstrass_smooth(0.5).decay_hypothesis());
}

TEST(Tabulated, LinearInterpolationAndRange) {
  const auto q = PotentialSpec::tabulated({{0.0, 1.0}, {2.0, 3.0}, {3.0, -1.0}});
  EXPECT_DOUBLE_EQ(eval(q, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(eval(q, 2.5), 1.0);
  EXPECT_THROW(eval(q, 3.5), RangeError);
  EXPECT_THROW(eval_derivative(q, 1.0), DomainError);
  EXPECT_NEAR(eval_derivative(q, 1.0, 1e-3), 1.0, 1e-12);
}

TEST(Tabulated, LoadsCsvWithHeaderAndComments) {
  const auto path = std::filesystem::temp_directory_path() / "stark_potentials_test.csv";
  {
    std::ofstream out(path);
    out << "# sampled q\nx,q\n0,0.5\n1,0.25\n4,0.125\n";
  }
  const auto samples = load_tabulated_csv(path.string());
  ASSERT_EQ(samples.size(), 3u);
  EXPECT_DOUBLE_EQ(samples[2].x, 4.0);
  const auto q = make_potential("tabulated", {{"file", path.string()}});
  EXPECT_DOUBLE_EQ(eval(q, 2.5), 0.1875);
  std::filesystem::remove(path);
  EXPECT_THROW(load_tabulated_csv(path.string()), DomainError);
}

TEST(Registry, ParseDescribeRoundTrip) {
  for (const char* text : {"zero", "power_law{A=1,beta=0.5}", "resonant{A=0.5,phi=0,decay=0.5}",
                           "weierstrass_smooth{alpha=0.25,K=12}"}) {
    const auto q = parse_potential(text);
    const auto again = parse_potential(describe(q));
    EXPECT_EQ(describe(again), describe(q));
    for (double x : {0.0, 0.7, 13.0}) EXPECT_EQ(eval(again, x), eval(q, x));
  }
  EXPECT_EQ(parse_potential("power_law").decay_exponent, 0.5);
  EXPECT_EQ(parse_potential(" power_law { beta = 0.75 } ").decay_exponent, 0.75);
}

TEST(Registry, RejectsUnknownNamesAndParameters) {
  EXPECT_THROW(parse_potential("gaussian"), DomainError);
  EXPECT_THROW(parse_potential("power_law{gamma=1}"), DomainError);
  EXPECT_THROW(parse_potential("power_law{A=one}"), DomainError);
  EXPECT_THROW(parse_potential("power_law{A=1"), DomainError);
  EXPECT_EQ(presets().size(), 5u);
}
