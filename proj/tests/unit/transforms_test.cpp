#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <gtest/gtest.h>

#include "stark/errors.hpp"
#include "stark/transforms.hpp"

using namespace stark;

namespace {
constexpr double kC = 1.3103706971044482;
}

TEST(Map, Constant) { EXPECT_NEAR(LiouvilleMap::c, std::pow(1.5, 2.0 / 3.0), 1e-15); }

TEST(Map, Examples) {
  EXPECT_EQ(xi_of_x(0.0), 0.0);
  EXPECT_DOUBLE_EQ(xi_of_x(1.0), 2.0 / 3.0);
  EXPECT_NEAR(xi_of_x(x_of_xi(1.0)), 1.0, 1e-15);
  EXPECT_EQ(x_of_xi(0.0), 0.0);
  EXPECT_NEAR(x_of_xi(1.0), 1.310371, 1e-6);
  EXPECT_NEAR(x_of_xi(2.0 / 3.0), 1.0, 1e-15);
  EXPECT_THROW(xi_of_x(-1e-9), DomainError);
  EXPECT_THROW(x_of_xi(-1.0), DomainError);
}

TEST(Map, RoundTripOverTwelveDecades) {
  for (double e = -6.0; e <= 6.0; e += 0.05) {
    const double x = std::pow(10.0, e);
    EXPECT_NEAR(x_of_xi(xi_of_x(x)) / x, 1.0, 1e-12);
    const double xi = xi_of_x(x);
    EXPECT_NEAR(x_of_xi(xi) / (kC * std::pow(xi, 2.0 / 3.0)), 1.0, 1e-14);
  }
}

// The examples below use the published +5/(36 xi^2) form.
TEST(EffectivePotential, PositiveFormExamples) {
  const auto zero = PotentialSpec::zero();
  const auto pl = PotentialSpec::power_law(1.0, 0.5);
  const auto pos = InverseSquare::positive;
  EXPECT_NEAR(effective_potential(zero, 1.0, 0.0, pos), 5.0 / 36.0, 1e-15);
  EXPECT_NEAR(effective_potential(zero, 1.0, 1.0, pos), -0.62426, 1e-5);
  EXPECT_NEAR(effective_potential(pl, 1.0, 0.0, pos), 5.0 / 36.0 + 1.0 / (std::sqrt(1.0 + kC) * kC), 1e-15);
  EXPECT_NEAR(effective_potential(pl, 1.0, 0.0, pos), 0.64096, 1e-5);
  EXPECT_NEAR(b_term(zero, 1.0, pos), 5.0 / 36.0, 1e-15);
  EXPECT_NEAR(b_term(pl, 8.0, pos), 5.0 / (36.0 * 64.0) + 1.0 / (std::sqrt(1.0 + 4 * kC) * 4 * kC), 1e-15);
  EXPECT_NEAR(b_term(pl, 8.0, pos), 0.0785365, 1e-7);
  EXPECT_NEAR(x_of_xi(8.0), 4.0 * kC, 1e-13);
}

TEST(EffectivePotential, DerivedFormExamples) {
  const auto zero = PotentialSpec::zero();
  const auto pl = PotentialSpec::power_law(1.0, 0.5);
  EXPECT_NEAR(effective_potential(zero, 1.0, 0.0), -5.0 / 36.0, 1e-15);
  EXPECT_NEAR(effective_potential(zero, 1.0, 1.0), -5.0 / 36.0 - 1.0 / kC, 1e-15);
  EXPECT_NEAR(effective_potential(pl, 1.0, 0.0), -5.0 / 36.0 + 1.0 / (std::sqrt(1.0 + kC) * kC), 1e-15);
  EXPECT_NEAR(b_term(pl, 8.0), -5.0 / (36.0 * 64.0) + 1.0 / (std::sqrt(1.0 + 4 * kC) * 4 * kC), 1e-15);
}

TEST(EffectivePotential, SingularAtZero) {
  EXPECT_THROW(effective_potential(PotentialSpec::zero(), 0.0, 1.0), SingularityError);
  EXPECT_THROW(b_term(PotentialSpec::zero(), 0.0), SingularityError);
}

TEST(EffectivePotential, LambdaSplitIdentity) {
  const PotentialSpec specs[] = {PotentialSpec::zero(), PotentialSpec::power_law(1, 0.5), PotentialSpec::resonant(1),
                                 PotentialSpec::weierstrass_smooth(0.5, 8)};
  for (const auto& q : specs) {
    for (double xi = 0.01; xi < 1e5; xi *= 1.37) {
      for (double lambda : {-2.0, 0.0, 1.0, 3.0}) {
        const double gap = effective_potential(q, xi, lambda) - b_term(q, xi) + lambda_term(xi, lambda);
        EXPECT_NEAR(gap, 0.0, 1e-15 * (1.0 + std::abs(b_term(q, xi))));
        const double want = lambda / (kC * std::pow(xi, 2.0 / 3.0));
        EXPECT_NEAR(lambda_term(xi, lambda), want, 1e-14 * std::abs(want));
      }
    }
  }
}

TEST(EffectivePotential, DecaysLikeXiToMinusTwoThirds) {
  // |V| <= (5/36 + (A + |lambda|)/c) xi^(-2/3) for bounded q and xi >= 1.
  const auto q = PotentialSpec::power_law(1.0, 0.5);
  for (double lambda : {-2.0, 0.0, 3.0}) {
    const double bound = 5.0 / 36.0 + (1.0 + std::abs(lambda)) / kC;
    for (double xi = 1.0; xi < 1e6; xi *= 1.1) {
      EXPECT_LE(std::abs(effective_potential(q, xi, lambda)), bound * std::pow(xi, -2.0 / 3.0));
    }
  }
}

TEST(Push, Examples) {
  const auto z = push_solution(0.0, 0.0, 1.0);
  EXPECT_EQ(z.value, 0.0);
  EXPECT_EQ(z.slope, 0.0);
  const auto w = push_solution(1.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(w.value, 1.0);
  EXPECT_DOUBLE_EQ(w.slope, 0.25);
  EXPECT_THROW(push_solution(1.0, 0.0, 0.0), SingularityError);
}

TEST(Pull, Examples) {
  const auto z = pull_solution(0.0, 0.0, 1.0);
  EXPECT_EQ(z.value, 0.0);
  EXPECT_EQ(z.slope, 0.0);
  const auto u = pull_solution(1.0, 0.25, 2.0 / 3.0);
  EXPECT_NEAR(u.value, 1.0, 1e-15);
  EXPECT_NEAR(u.slope, 0.0, 1e-15);
  EXPECT_THROW(pull_solution(1.0, 0.0, 0.0), SingularityError);
}

TEST(Pull, InvertsPushOnRandomSamples) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> value(-3.0, 3.0);
  std::uniform_real_distribution<double> log_x(-4.0, 5.0);
  for (int i = 0; i < 2000; ++i) {
    const double u = value(rng), du = value(rng), x = std::pow(10.0, log_x(rng));
    const auto w = push_solution(u, du, x);
    const auto back = pull_solution(w.value, w.slope, xi_of_x(x));
    // The pull subtracts u/(4x), so small x loses digits in proportion.
    const double scale = std::abs(u) * (1.0 + 0.25 / x) + std::abs(du);
    EXPECT_NEAR(back.value, u, 1e-12 * scale);
    EXPECT_NEAR(back.slope, du, 1e-12 * scale);
    const auto w2 = push_solution(back.value, back.slope, x);
    EXPECT_NEAR(w2.value, w.value, 1e-12 * (std::abs(w.value) + std::abs(w.slope)));
  }
}

namespace {

using State = std::array<double, 2>;

// Solves -u'' - x u + q u = lambda u on [1, 100] and, independently, the
// transformed equation from the pushed data at x = 1. Returns the largest
// relative disagreement of push(u, u') with (omega, omega').
double conjugacy_error(const PotentialSpec& q, double lambda, InverseSquare term) {
  namespace odeint = boost::numeric::odeint;
  std::vector<double> xs;
  for (double x = 1.0; x <= 100.0 + 1e-9; x += 0.5) xs.push_back(x);
  std::vector<double> xis;
  for (double x : xs) xis.push_back(xi_of_x(x));

  State y{0.3, -0.7};
  const State y0 = y;
  std::vector<State> direct;
  odeint::integrate_times(
      odeint::make_controlled<odeint::runge_kutta_cash_karp54<State>>(1e-13, 1e-13),
      [&](const State& s, State& ds, double x) {
        ds[0] = s[1];
        ds[1] = (eval(q, x) - x - lambda) * s[0];
      },
      y, xs.begin(), xs.end(), 1e-3, [&](const State& s, double) { direct.push_back(s); });

  const auto w0 = push_solution(y0[0], y0[1], 1.0);
  State w{w0.value, w0.slope};
  std::vector<State> transformed;
  odeint::integrate_times(
      odeint::make_controlled<odeint::runge_kutta_cash_karp54<State>>(1e-13, 1e-13),
      [&](const State& s, State& ds, double xi) {
        ds[0] = s[1];
        ds[1] = (effective_potential(q, xi, lambda, term) - 1.0) * s[0];
      },
      w, xis.begin(), xis.end(), 1e-3, [&](const State& s, double) { transformed.push_back(s); });

  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto p = push_solution(direct[i][0], direct[i][1], xs[i]);
    const double scale = std::hypot(p.value, p.slope);
    worst = std::max(worst, std::hypot(p.value - transformed[i][0], p.slope - transformed[i][1]) / scale);
  }
  return worst;
}

}  // namespace

TEST(Conjugacy, DirectAndTransformedSolutionsAgree) {
  for (const auto& q : {PotentialSpec::zero(), PotentialSpec::power_law(1.0, 0.5)}) {
    for (double lambda : {0.0, 1.0}) {
      EXPECT_LE(conjugacy_error(q, lambda, InverseSquare::derived), 1e-6) << describe(q) << " lambda=" << lambda;
    }
  }
}

TEST(Conjugacy, PublishedInverseSquareSignDoesNotConjugate) {
  EXPECT_GT(conjugacy_error(PotentialSpec::zero(), 0.0, InverseSquare::positive), 1e-3);
}
