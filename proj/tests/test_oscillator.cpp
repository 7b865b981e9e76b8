#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kamforge/duffing.hpp"
#include "kamforge/oscillator.hpp"
#include "support.hpp"

using namespace kamforge;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// T0(n) = 4 sqrt(n+1) int_0^1 (1 - u^{2n+2})^{-1/2} du, in closed form via Beta.
double beta_period(int n) {
  const double p = 2.0 * n + 2.0;
  const double B = std::tgamma(1.0 / p) * std::tgamma(0.5) / std::tgamma(1.0 / p + 0.5);
  return 4.0 * std::sqrt(n + 1.0) * B / p;
}
}  // namespace

TEST(Oscillator, HarmonicPeriodIsTwoPi) { EXPECT_NEAR(compute_period(0), kTwoPi, 1e-10); }

TEST(Oscillator, PeriodMatchesBetaIntegral) {
  for (int n = 0; n <= 3; ++n) EXPECT_NEAR(compute_period(n), beta_period(n), 1e-9) << "n = " << n;
}

TEST(Oscillator, HarmonicReferenceIsCosine) {
  auto orb = reference_solution(0, 64);
  for (double t : {0.0, 0.3, 1.7, 4.0, 9.1}) {
    EXPECT_NEAR(orb.u0(t), std::cos(t), 1e-10);
    EXPECT_NEAR(orb.v0(t), -std::sin(t), 1e-10);
  }
}

TEST(Oscillator, EnergyRelationOnSamples) {
  for (int n = 1; n <= 3; ++n) {
    auto orb = reference_solution(n, 256);
    ASSERT_EQ(orb.u.size(), 256u);
    for (std::size_t j = 0; j < orb.u.size(); ++j)
      EXPECT_NEAR((n + 1) * orb.v[j] * orb.v[j] + std::pow(orb.u[j], 2 * n + 2), 1.0, 1e-10);
  }
}

TEST(Oscillator, HalfPeriodReachesMinusOne) {
  for (int n = 1; n <= 3; ++n) {
    auto orb = reference_solution(n, 256);
    EXPECT_NEAR(orb.u0(0.5 * orb.T0), -1.0, 1e-10);
    EXPECT_NEAR(orb.v0(0.5 * orb.T0), 0.0, 1e-10);
    auto [u, v] = orb.state(0.37 * orb.T0);
    EXPECT_DOUBLE_EQ(u, orb.u0(0.37 * orb.T0));
    EXPECT_DOUBLE_EQ(v, orb.v0(0.37 * orb.T0));
  }
}

TEST(Oscillator, RejectsBadSampleCount) {
  EXPECT_THROW(reference_solution(1, 100), std::exception);
  EXPECT_THROW(reference_solution(1, 32), std::exception);
}

TEST(ActionAngle, ZeroAngleIsTurningPoint) {
  ActionAngleMap map(1, 1);
  for (double I : {0.5, 1.0, 2.3}) {
    auto [x, y] = map.forward(0.0, I);
    EXPECT_NEAR(x, std::pow(map.c(), map.alpha()) * std::pow(I, map.alpha()), 1e-13);
    EXPECT_NEAR(y, 0.0, 1e-13);
  }
}

TEST(ActionAngle, OrbitEnergyDependsOnActionOnly) {
  for (int n = 1; n <= 2; ++n) {
    ActionAngleMap map(n, 1);
    for (double th : {0.0, 0.21, 0.5, 0.83}) {
      auto [x, y] = map.forward(th, 1.4);
      EXPECT_NEAR(oscillator_energy(n, x, y), map.energy(1.4), 1e-11);
    }
    EXPECT_NEAR(map.action_of_energy(map.energy(1.7)), 1.7, 1e-12);
  }
}

// Area enclosed by the orbit of action I equals I: a direct test of the normalisation.
TEST(ActionAngle, EnclosedAreaEqualsAction) {
  ActionAngleMap map(1, 1);
  const double I = 1.3;
  const int N = 4096;
  double area = 0.0;
  for (int j = 0; j < N; ++j) {
    auto [x0, y0] = map.forward(double(j) / N, I);
    auto [x1, y1] = map.forward(double(j + 1) / N, I);
    area += 0.5 * (x0 * y1 - x1 * y0);
  }
  EXPECT_NEAR(std::abs(area), I, 1e-6);
}

TEST(ActionAngle, RoundTrip) {
  ActionAngleMap map(1, 2);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.0, 1.0), A(0.5, 2.5);
  for (int q = 0; q < 50; ++q) {
    std::vector<double> th{U(rng), U(rng)}, I{A(rng), A(rng)};
    auto [x, y] = map.from_action_angle(th, I);
    auto [th2, I2] = map.to_action_angle(x, y);
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(I2[j], I[j], 1e-8 * I[j]);
      double dth = std::remainder(th2[j] - th[j], 1.0);
      EXPECT_NEAR(dth, 0.0, 1e-8);
    }
  }
}

TEST(ActionAngle, UnitJacobian) {
  ActionAngleMap map(2, 1);
  for (double th : {0.1, 0.45, 0.77})
    for (double I : {0.8, 1.9}) {
      std::vector<double> z{th, I};
      auto f = [&](std::span<const double> w) {
        auto [x, y] = map.forward(w[0], w[1]);
        return std::vector<double>{x, y};
      };
      EXPECT_LT(kamforge::testing::symplectic_defect(f, z, 1e-5), 1e-7);
    }
}
