#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "kamforge/kam.hpp"
#include "support.hpp"

using namespace kamforge;
namespace kt = kamforge::testing;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

DiophantineParams dc_for(const AveragedForm& F) {
  DiophantineParams dc;
  dc.eps = F.eps;
  dc.a = F.a;
  return dc;
}

KamParams steps(int n) {
  KamParams kp;
  kp.max_steps = n;
  kp.tol = 0.0;
  return kp;
}

const AveragedForm& synthetic() {
  static const AveragedForm F = kt::synthetic_form();
  return F;
}

const KamRun& synthetic_run() {
  static const KamRun run = kam_iterate(synthetic(), steps(2), dc_for(synthetic()), true);
  return run;
}

double max_abs(const spectral::Coeffs& c) {
  double m = 0.0;
  for (auto x : c) m = std::max(m, std::abs(x));
  return m;
}

// |L S + R - R(0,0)| / |R| with L = <freq, d_theta> + d_t.
double residual(const spectral::Coeffs& S, const spectral::Coeffs& R, const spectral::Grid& g,
                std::span<const double> freq) {
  auto res = spectral::derive_time(S, g);
  for (int j = 0; j < g.d; ++j) {
    auto dj = spectral::derive_angle(S, g, j);
    for (std::size_t i = 0; i < res.size(); ++i) res[i] += freq[j] * dj[i];
  }
  for (std::size_t i = 0; i < res.size(); ++i) res[i] += R[i];
  res[0] -= R[0];
  return max_abs(res) / std::max(max_abs(R), 1e-300);
}

struct Sampler {
  std::mt19937_64 rng{17};
  double angle() { return std::uniform_real_distribution<double>(0.0, kTwoPi)(rng); }
  std::vector<double> in_box(const ActionBox& b, double frac = 0.9) {
    std::uniform_real_distribution<double> U(-frac, frac);
    std::vector<double> r(b.dim());
    for (int i = 0; i < b.dim(); ++i) r[i] = b.center()[i] + b.radius() * U(rng);
    return r;
  }
};

}  // namespace

TEST(Kam, ZeroPerturbationStopsAtOnce) {
  auto F = kt::planted_form({}, 1.0, 1.0, 0.1, 1);
  KamParams kp;
  auto run = kam_iterate(F, kp, dc_for(F));
  EXPECT_TRUE(run.converged);
  EXPECT_TRUE(run.changes.empty());
  EXPECT_EQ(run.final_state().e, 0.0);
  EXPECT_EQ(run.final_state().Omega, F.Omega);
}

TEST(Kam, ErrorIsLargestJetNorm) {
  const auto& F = synthetic();
  KamParams kp;
  auto st = kam_initial_state(F, kp);
  EXPECT_EQ(st.m, 0);
  EXPECT_GT(st.e, 0.0);
  EXPECT_EQ(st.e, std::max({st.norm_R0, st.norm_R1, st.norm_R2}));
  EXPECT_EQ(st.Omega, F.Omega);
}

TEST(Kam, HomologicalEquationsHold) {
  auto F = kt::random_form(30);
  KamParams kp;
  auto st = kam_initial_state(F, kp);
  KamChange ch;
  KamStepLog log;
  kam_step(F, st, kp, dc_for(F), &ch, &log);
  const auto& g = ch.grid;
  const auto fr = F.frequency();
  EXPECT_LT(residual(ch.S0, ch.R0, g, fr), 1e-12);
  for (int i = 0; i < 2; ++i) EXPECT_LT(residual(ch.S1[i], ch.R_star[i], g, fr), 1e-12);
  for (int ij = 0; ij < 4; ++ij) EXPECT_LT(residual(ch.S2[ij], ch.R_2star[ij], g, fr), 1e-12);
  // nu removes the mean of R_*: [R_*]_i + 2 eps^{-a} (Omega nu)_i = 0.
  for (int i = 0; i < 2; ++i) {
    double s = ch.R_star[i][0].real();
    for (int j = 0; j < 2; ++j) s += 2.0 / F.eps * F.Omega[i * 2 + j] * ch.nu[j];
    EXPECT_NEAR(s, 0.0, 1e-12 * std::abs(ch.R_star[i][0]));
  }
  // S2 is symmetric.
  for (std::size_t i = 0; i < ch.S2[1].size(); ++i) EXPECT_EQ(ch.S2[1][i], ch.S2[2][i]);
  EXPECT_GT(log.min_divisor, 0.0);
  EXPECT_LT(log.contraction, kp.max_contraction);
}

TEST(Kam, DroppedConstant) {
  auto F = kt::random_form(10);
  KamParams kp;
  KamChange ch;
  kam_step(F, kam_initial_state(F, kp), kp, dc_for(F), &ch);
  double expect = 0.0;
  for (int i = 0; i < 2; ++i) {
    expect += F.omega[i] * ch.nu[i];
    for (int j = 0; j < 2; ++j) expect += F.Omega[i * 2 + j] * ch.nu[i] * ch.nu[j];
  }
  expect /= F.eps;
  EXPECT_NEAR(ch.dropped_constant(F, F.Omega), expect, 1e-15 * std::max(1.0, std::abs(expect)));
}

TEST(Kam, ErrorDecaysFasterThanGeometric) {
  const auto& run = synthetic_run();
  ASSERT_EQ(run.log.size(), 3u);
  for (std::size_t m = 1; m < run.log.size(); ++m) {
    EXPECT_LT(run.log[m].e, run.log[m - 1].e * run.log[m - 1].e * 1e3) << "step " << m;
    EXPECT_LT(run.log[m].e, 0.1 * run.log[m - 1].e);
  }
}

TEST(Kam, FrequencyMatrixMovesLittle) {
  const auto& run = synthetic_run();
  const auto& F = synthetic();
  const double e0 = run.log.front().e;
  double drift = 0.0;
  for (int i = 0; i < 4; ++i) drift = std::max(drift, std::abs(run.final_state().Omega[i] - F.Omega[i]));
  EXPECT_LE(F.eps * drift, 10.0 * e0);
  // Each step moves Omega by the logged amount.
  for (std::size_t m = 1; m < run.states.size(); ++m) {
    double step = 0.0;
    for (int i = 0; i < 4; ++i) step = std::max(step, std::abs(run.states[m].Omega[i] - run.states[m - 1].Omega[i]));
    EXPECT_NEAR(step, run.log[m].dOmega, 1e-14);
  }
}

TEST(Kam, StepsAreConjugations) {
  const auto& run = synthetic_run();
  const auto& F = synthetic();
  Sampler smp;
  for (std::size_t m = 0; m < run.changes.size(); ++m) {
    const auto &A = run.states[m], &B = run.states[m + 1];
    kt::ConjugationError e;
    for (int q = 0; q < 40; ++q) {
      std::vector<double> phi{smp.angle(), smp.angle()};
      const double t = smp.angle();
      auto rho = smp.in_box(B.P.box);
      auto pc = run.changes[m].apply(phi, t, rho);
      e.add(B.value(F, phi, t, rho), A.value(F, pc.theta, t, pc.I) + pc.dS_dt);
    }
    EXPECT_LT(e.relative(), 1e-8) << "step " << m + 1;
  }
}

TEST(Kam, StepsAreSymplectic) {
  const auto& run = synthetic_run();
  Sampler smp;
  for (std::size_t m = 0; m < run.changes.size(); ++m) {
    const double radius = run.states[m + 1].P.box.radius();
    for (int q = 0; q < 5; ++q) {
      const double t = smp.angle();
      auto rho = smp.in_box(run.states[m + 1].P.box, 0.5);
      std::vector<double> z{smp.angle(), smp.angle(), rho[0], rho[1]};
      auto f = [&](std::span<const double> w) {
        auto pc = run.changes[m].apply(w.subspan(0, 2), t, w.subspan(2, 2));
        return std::vector<double>{pc.theta[0], pc.theta[1], pc.I[0], pc.I[1]};
      };
      EXPECT_LT(kt::symplectic_defect(f, z, std::min(1e-5, 1e-2 * radius)), 1e-6);
    }
  }
}

TEST(Kam, JetReproducesLowPart) {
  const auto& F = synthetic();
  const auto& jet = F.low;
  // P and its jet agree to third order at rho = 0.
  std::vector<double> th{0.4, 2.0};
  for (double h : {1e-2, 5e-3}) {
    std::vector<double> rho{h, -0.5 * h};
    const double diff = std::abs(F.P.evaluate(th, 0.7, rho) - jet.value(th, 0.7, rho));
    EXPECT_LT(diff, 1e-3 * h * h * h) << "h = " << h;
  }
}
