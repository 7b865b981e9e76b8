#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kamforge/diophantine.hpp"

using namespace kamforge;

namespace {

DiophantineParams unit_scale(int K_split, int K_check, double gamma = 1e-3) {
  DiophantineParams p;
  p.eps = 1.0;
  p.a = 0.0;
  p.K_split = K_split;
  p.K_check = K_check;
  p.gamma = gamma;
  return p;
}

DiophantineParams small_box(double gamma) {
  DiophantineParams p;
  p.gamma = gamma;
  p.K_split = 10;
  p.K_check = 40;
  return p;
}

}  // namespace

TEST(SmallDivisor, Oracles) {
  std::vector<int> k0{0, 0};
  std::vector<double> w{0.3, 0.7};
  EXPECT_EQ(small_divisor(k0, 3, w, 0.1, 1.0), 3.0);
  std::vector<int> k1{1};
  std::vector<double> two{2.0};
  EXPECT_EQ(small_divisor(k1, 1, two, 1.0, 1.0), 3.0);
  // eps^{-a} scaling: 0.2 / 0.1 = 2.
  std::vector<double> w2{0.2};
  EXPECT_NEAR(small_divisor(k1, -2, w2, 0.1, 1.0), 0.0, 1e-15);
}

TEST(SmallDivisor, CompensatedNearCancellation) {
  std::vector<double> w{0.1, 0.1 + 1e-13};
  std::vector<int> k{1000, -1000};
  EXPECT_NEAR(small_divisor(k, 0, w, 1.0, 0.0), 1e-10, 1e-13);
}

TEST(Diophantine, ExactResonanceFails) {
  std::vector<double> w{0.125, 0.125};
  auto p = small_box(1e-3);
  auto r = check_dc(w, p);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.margin, 0.0);
  EXPECT_EQ(r.divisor, 0.0);
  EXPECT_EQ(critical_gamma(w, p), 0.0);
}

// With a single frequency (sqrt 5 - 1)/2 the worst ratio |k w + l| k^2 among
// |k| + |l| <= 10 is at k = 1, l = -1: 1 - w.
TEST(Diophantine, GoldenMeanCriticalGamma) {
  const double w = 0.5 * (std::sqrt(5.0) - 1.0);
  std::vector<double> om{w};
  auto p = unit_scale(10, 10);
  EXPECT_NEAR(critical_gamma(om, p), 1.0 - w, 1e-15);
  p.gamma = 0.9 * (1.0 - w);
  EXPECT_TRUE(check_dc(om, p).pass);
  p.gamma = 1.1 * (1.0 - w);
  auto r = check_dc(om, p);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.k, std::vector<int>{1});
  EXPECT_EQ(r.l, -1);
}

TEST(Diophantine, RationalFrequencyResonatesOnlyWithinReach) {
  std::vector<double> half{0.5};
  EXPECT_DOUBLE_EQ(critical_gamma(half, unit_scale(1, 1)), 0.5);
  EXPECT_EQ(critical_gamma(half, unit_scale(3, 3)), 0.0);
}

TEST(Diophantine, SecondRegimeBound) {
  const double w = 0.5 * (std::sqrt(5.0) - 1.0);
  std::vector<double> om{w};
  // Everything beyond order 1 uses gamma / (1 + |k|)^2.
  auto p = unit_scale(1, 10, 1e-3);
  auto r = check_dc(om, p);
  const int nk = std::abs(r.k[0]);
  const double bound = r.regime == 1 ? p.gamma / std::pow(nk, 2.0) : p.gamma / std::pow(1.0 + nk, 2.0);
  EXPECT_NEAR(r.margin, r.divisor / bound, 1e-12 * r.margin);
}

TEST(Diophantine, MarginAgreesWithWorstMode) {
  std::vector<double> om{0.1 * std::sqrt(2.0), 0.1 * std::sqrt(3.0)};
  auto p = small_box(1e-3);
  auto r = check_dc(om, p);
  int nk = std::abs(r.k[0]) + std::abs(r.k[1]);
  const double s = 1.0 / p.eps;
  const double bound =
      r.regime == 1 ? s * p.gamma / std::pow(nk, 3.0) : p.gamma / std::pow(1.0 + nk, 3.0);
  EXPECT_NEAR(r.margin, small_divisor(r.k, r.l, om, p.eps, p.a) / bound, 1e-12 * r.margin);
  EXPECT_NEAR(critical_gamma(om, p), r.margin * p.gamma, 1e-15);
  EXPECT_EQ(r.pass, r.margin >= 1.0);
}

TEST(Diophantine, ZeroGammaExcludesNothing) {
  std::vector<double> lo{1.0, 1.0}, hi{2.0, 2.0};
  auto m = excluded_measure(small_box(0.0), lo, hi, 2000, 5);
  EXPECT_EQ(m.excluded, 0u);
  EXPECT_EQ(m.fraction, 0.0);
  EXPECT_NEAR(m.lo, 0.0, 1e-15);
}

TEST(Diophantine, SweepIsMonotoneAndRoughlyLinear) {
  std::vector<double> lo{1.0, 1.0}, hi{2.0, 2.0};
  std::vector<double> gammas{8e-3, 4e-3, 2e-3, 1e-3};
  auto sweep = excluded_measure_sweep(small_box(0.0), gammas, lo, hi, 4000, 11);
  ASSERT_EQ(sweep.size(), 4u);
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    EXPECT_LE(sweep[i].excluded, sweep[i - 1].excluded);
    ASSERT_GT(sweep[i - 1].fraction, 0.0);
    const double ratio = sweep[i].fraction / sweep[i - 1].fraction;
    EXPECT_GE(ratio, 0.3);
    EXPECT_LE(ratio, 0.7);
  }
  for (const auto& m : sweep) {
    EXPECT_LE(m.lo, m.fraction);
    EXPECT_GE(m.hi, m.fraction);
  }
  // Same seed, same answer; the single-gamma call sees the same points.
  auto one = excluded_measure(small_box(2e-3), lo, hi, 4000, 11);
  EXPECT_EQ(one.excluded, sweep[2].excluded);
}

TEST(Diophantine, MeasureNeedsEnoughSamples) {
  std::vector<double> lo{1.0}, hi{2.0};
  EXPECT_THROW(excluded_measure(small_box(1e-3), lo, hi, 10, 1), std::invalid_argument);
}

TEST(Diophantine, FindPointPicksLargestMargin) {
  std::vector<double> lo{1.0, 1.0}, hi{2.0, 2.0};
  auto p = small_box(1e-3);
  auto id = [](std::span<const double> I) { return std::vector<double>(I.begin(), I.end()); };
  auto pt = find_dc_point(id, lo, hi, p, 4);
  ASSERT_EQ(pt.map.size(), 16u);
  EXPECT_DOUBLE_EQ(pt.map.front().I[0], 1.125);
  EXPECT_DOUBLE_EQ(pt.map.front().I[1], 1.125);
  EXPECT_DOUBLE_EQ(pt.map[1].I[1], 1.375);
  for (const auto& s : pt.map) EXPECT_LE(s.margin, pt.report.margin);
  EXPECT_EQ(pt.omega, pt.I0);
  EXPECT_EQ(check_dc(pt.omega, p).margin, pt.report.margin);
}

TEST(Diophantine, StableRadius) {
  auto p = small_box(1e-3);
  EXPECT_EQ(dc_stable_radius(0.4, p, 2, 1.0), 0.0);
  const double r1 = dc_stable_radius(3.0, p, 2, 1.0), r2 = dc_stable_radius(3.0, p, 2, 2.0);
  EXPECT_GT(r1, 0.0);
  EXPECT_DOUBLE_EQ(r2, 0.5 * r1);
  EXPECT_LT(r1, dc_stable_radius(5.0, p, 2, 1.0));
}

TEST(Diophantine, LogLaw) {
  auto p = DiophantineParams::log_law(std::exp(-2.0), 1.0, 1.5);
  EXPECT_NEAR(p.gamma, std::pow(2.0, -3.0), 1e-15);
  EXPECT_EQ(p.K_split, 3);  // ceil(2^1.5)
  EXPECT_EQ(p.K_check, 30);
}
