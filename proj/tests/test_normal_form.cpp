#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "kamforge/normal_form.hpp"
#include "support.hpp"

using namespace kamforge;
namespace kt = kamforge::testing;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Sampler {
  std::mt19937_64 rng{99};
  double angle() { return std::uniform_real_distribution<double>(0.0, kTwoPi)(rng); }
  std::vector<double> in_box(const ActionBox& b, double frac = 0.9) {
    std::uniform_real_distribution<double> U(-frac, frac);
    std::vector<double> r(b.dim());
    for (int i = 0; i < b.dim(); ++i) r[i] = b.center()[i] + b.radius() * U(rng);
    return r;
  }
};

// The synthetic system carried through both normal-form steps and the time average.
// Twelve time slices keep the products of l = 2 modes off the Nyquist line.
struct SyntheticRun {
  HamiltonianSpec spec = kt::synthetic_spec(1e-3, 2, 16, 12);
  NormalFormRun nf = run_normal_form(spec, true);
  TimeAveraged ta = time_average(spec, nf.final_state());
};

const SyntheticRun& synthetic_run() {
  static const SyntheticRun r;
  return r;
}

FourierField cosine(int d, std::vector<int> k, int l, double amp) {
  FourierField f(d);
  f.assign(ModeIndex{std::move(k), l}, 0.5 * amp);
  return f;
}

}  // namespace

// cos(theta + t) with frequency 2: the divisor is 3 and S = -sin(theta + t) / 3.
TEST(Homological, SingleModeOracle) {
  auto R = cosine(1, {1}, 1, 1.0);
  std::vector<double> omega{0.2};
  DiophantineParams dc;
  auto S = solve_homological(R, omega, 0.1, 1.0, 10, dc);
  ASSERT_EQ(S.size(), 2u);
  for (double x : {0.0, 0.4, 2.2}) {
    std::vector<double> th{x};
    EXPECT_NEAR(S.evaluate(th, 0.3), -std::sin(x + 0.3) / 3.0, 1e-15);
  }
}

TEST(Homological, AngleIndependentPartIsLeft) {
  FourierField R = cosine(2, {0, 0}, 1, 1.0);
  R.assign(ModeIndex{{0, 0}, 0}, 4.0);
  std::vector<double> omega{0.71, 0.89};
  auto S = solve_homological(R, omega, 0.1, 1.0, 10, DiophantineParams{});
  EXPECT_TRUE(S.empty());
}

TEST(Homological, ModesAboveCutoffAreSkipped) {
  auto R = cosine(1, {3}, 2, 1.0);
  std::vector<double> omega{0.2};
  EXPECT_TRUE(solve_homological(R, omega, 0.1, 1.0, 4, DiophantineParams{}).empty());
  EXPECT_EQ(solve_homological(R, omega, 0.1, 1.0, 5, DiophantineParams{}).size(), 2u);
}

TEST(Homological, ResonanceThrowsDcFailure) {
  auto R = cosine(1, {1}, -1, 1e-3);
  std::vector<double> omega{0.1};  // eps^{-1} omega = 1 meets l = -1
  try {
    solve_homological(R, omega, 0.1, 1.0, 10, DiophantineParams{});
    FAIL() << "no DcFailure";
  } catch (const DcFailure& e) {
    // Either member of the conjugate pair may be reported.
    ASSERT_EQ(e.k.size(), 1u);
    EXPECT_EQ(e.k[0] * e.l, -1);
  }
  // A zero coefficient at the resonant mode is harmless.
  FourierField Z(1);
  EXPECT_NO_THROW(solve_homological(Z, omega, 0.1, 1.0, 10, DiophantineParams{}));
}

TEST(Homological, ResidualOnRandomModes) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> K(-4, 4), L(-3, 3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  FourierField R(2);
  while (R.size() < 100) R.assign(ModeIndex{{K(rng), K(rng)}, L(rng)}, complex(U(rng), U(rng)));
  std::vector<double> omega{0.7071067811865476, 0.8944271909999159};
  DiophantineParams dc;
  dc.gamma = 1e-6;
  auto S = solve_homological(R, omega, 0.1, 1.0, 20, dc);
  // eps^{-1} <omega, d_theta S> + d_t S = -(R - angle mean)
  auto LS = derive(S, {Axis::time, 0});
  for (int j = 0; j < 2; ++j) {
    auto dj = derive(S, {Axis::angle, j});
    for (const auto& [m, c] : dj.modes()) LS.add(m, 0.5 * 10.0 * omega[j] * c);
  }
  double worst = 0.0, scale = 0.0;
  for (const auto& [m, c] : R.modes()) {
    scale = std::max(scale, std::abs(c));
    bool zero_angle = m.k[0] == 0 && m.k[1] == 0;
    complex expect = zero_angle ? complex(0.0) : -c;
    worst = std::max(worst, std::abs(LS.coeff(m) - expect));
  }
  EXPECT_LT(worst, 1e-13 * scale);
}

TEST(NormalForm, SplitTailIsExact) {
  auto spec = kt::synthetic_spec();
  spec.b = 0.5;
  auto st = split_tail(spec);
  EXPECT_EQ(st.j, 0);
  EXPECT_DOUBLE_EQ(st.tau, spec.params.tau0);
  const auto& g = spec.R.grid;
  const double lift = std::pow(spec.eps, -spec.b);
  for (int n = 0; n < spec.R.node_count(); ++n)
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_NEAR(std::abs(st.R.at[n][i] + st.R_plus.at[n][i] - lift * spec.R.at[n][i]), 0.0, 1e-16);
      if (spectral::order(g, i) > st.K) {
        EXPECT_EQ(st.R.at[n][i], complex(0.0));
      }
    }
  EXPECT_EQ(st.h.norm(1.0), 0.0);
}

TEST(NormalForm, ZeroPerturbationIsFixed) {
  auto spec = kt::synthetic_spec(0.0);
  auto run = run_normal_form(spec, true);
  ASSERT_EQ(run.states.size(), 3u);
  for (const auto& st : run.states) {
    EXPECT_EQ(st.R.norm(1.0), 0.0);
    EXPECT_EQ(st.h.norm(1.0), 0.0);
  }
  for (const auto& S : run.changes) EXPECT_EQ(S.norm(1.0), 0.0);
}

TEST(NormalForm, StepsShrinkTheAngleDependentPart) {
  const auto& r = synthetic_run();
  ASSERT_EQ(r.nf.log.size(), 3u);
  for (std::size_t j = 1; j < r.nf.log.size(); ++j) {
    EXPECT_LT(r.nf.log[j].norm_R, 0.5 * r.nf.log[j - 1].norm_R) << "step " << j;
    EXPECT_LT(r.nf.log[j].contraction, 0.5);
    EXPECT_LT(r.nf.log[j].max_shift, 1.0);
    EXPECT_GT(r.nf.log[j].min_divisor, 0.0);
    EXPECT_DOUBLE_EQ(r.nf.log[j].tau, 0.5 * r.nf.log[j - 1].tau);
  }
}

TEST(NormalForm, StepsAreConjugations) {
  const auto& r = synthetic_run();
  Sampler smp;
  for (std::size_t j = 0; j < r.nf.changes.size(); ++j) {
    const auto &A = r.nf.states[j], &B = r.nf.states[j + 1];
    kt::ConjugationError e;
    for (int q = 0; q < 40; ++q) {
      std::vector<double> phi{smp.angle(), smp.angle()};
      const double t = smp.angle();
      auto rho = smp.in_box(B.R.box);
      auto pc = apply_change(r.nf.changes[j], phi, t, rho);
      e.add(B.value(r.spec, phi, t, rho), A.value(r.spec, pc.theta, t, pc.I) + pc.dS_dt);
    }
    EXPECT_LT(e.relative(), 1e-8) << "step " << j + 1;
  }
}

TEST(NormalForm, StepsAreSymplectic) {
  const auto& r = synthetic_run();
  Sampler smp;
  for (const auto& S : r.nf.changes) {
    for (int q = 0; q < 5; ++q) {
      const double t = smp.angle();
      auto rho = smp.in_box(S.box, 0.5);
      std::vector<double> z{smp.angle(), smp.angle(), rho[0], rho[1]};
      auto f = [&](std::span<const double> w) {
        auto pc = apply_change(S, w.subspan(0, 2), t, w.subspan(2, 2));
        return std::vector<double>{pc.theta[0], pc.theta[1], pc.I[0], pc.I[1]};
      };
      EXPECT_LT(kt::symplectic_defect(f, z, std::min(1e-5, 1e-2 * S.box.radius())), 1e-6);
    }
  }
}

TEST(NormalForm, TimeAverageLeavesConstantInTime) {
  const auto& r = synthetic_run();
  const auto& g = r.ta.h_avg.grid;
  std::vector<int> k(2);
  for (int n = 0; n < r.ta.h_avg.node_count(); ++n)
    for (std::size_t i = 1; i < g.size(); ++i) {
      EXPECT_EQ(r.ta.h_avg.at[n][i], complex(0.0));
      if (r.ta.S_tilde.at[n][i] != complex(0.0)) {
        int l = spectral::decode(g, i, k.data());
        EXPECT_EQ(k[0], 0);
        EXPECT_EQ(k[1], 0);
        EXPECT_NE(l, 0);
      }
    }
}

TEST(NormalForm, TimeAverageIsConjugation) {
  const auto& r = synthetic_run();
  const auto& last = r.nf.final_state();
  const auto& St = r.ta.S_tilde;
  auto Sdt = St.derive_time();
  Sampler smp;
  kt::ConjugationError e;
  for (int q = 0; q < 40; ++q) {
    std::vector<double> phi{smp.angle(), smp.angle()};
    const double t = smp.angle();
    auto J = smp.in_box(last.R.box);
    std::vector<double> th(phi);
    for (int j = 0; j < 2; ++j) {
      std::vector<int> ord(2, 0);
      ord[j] = 1;
      th[j] -= spectral::evaluate(St.combine(St.box.weights(J, ord)), St.grid, phi, t);
    }
    e.add(r.ta.value(r.spec, phi, t, J), last.value(r.spec, th, t, J) + Sdt.evaluate(phi, t, J));
  }
  EXPECT_LT(e.relative(), 1e-10);
}

TEST(NormalForm, ExpansionPointWithoutCorrectionIsI0) {
  auto spec = kt::synthetic_spec();
  NodeField zero(spec.R.grid, spec.R.box);
  double res = 1.0;
  auto I = locate_expansion_point(spec, zero, &res);
  EXPECT_EQ(I, spec.I0);
  EXPECT_LE(res, 1e-12);
}

TEST(NormalForm, ExpansionPointRestoresFrequency) {
  const auto& r = synthetic_run();
  double res = 1.0;
  auto I = locate_expansion_point(r.spec, r.ta.h_avg, &res);
  EXPECT_LT(res, 1e-10);
  // The averaged correction moves I_* only slightly away from I0.
  for (int j = 0; j < 2; ++j) EXPECT_LT(std::abs(I[j] - r.spec.I0[j]), r.nf.final_state().tau);
}

TEST(NormalForm, TaylorSplitReproducesHamiltonian) {
  const auto& r = synthetic_run();
  auto I_star = locate_expansion_point(r.spec, r.ta.h_avg);
  const double r0 = 0.25 * r.nf.final_state().tau;
  auto F = taylor_split(r.spec, I_star, r.ta, r0);
  EXPECT_EQ(F.frequency().size(), 2u);
  // Omega is half the Hessian of H0 for a quadratic H0 plus the [h] correction, symmetric.
  EXPECT_DOUBLE_EQ(F.Omega[1], F.Omega[2]);
  Sampler smp;
  kt::ConjugationError e;
  for (int q = 0; q < 40; ++q) {
    std::vector<double> phi{smp.angle(), smp.angle()};
    const double t = smp.angle();
    auto rho = smp.in_box(F.P.box);
    std::vector<double> I{I_star[0] + rho[0], I_star[1] + rho[1]};
    e.add(F.value(phi, t, rho), r.ta.value(r.spec, phi, t, I));
  }
  EXPECT_LT(e.relative(), 1e-9);
  // N carries the whole linear part: P has no rho-linear angle mean.
  std::vector<double> zero(2, 0.0);
  EXPECT_EQ(F.N(zero), 0.0);
  EXPECT_NEAR(F.Q(zero), 0.0, 1e-15);
}

TEST(CanonicalChange, ZeroGeneratorIsIdentity) {
  spectral::Grid g{2, 8, 4};
  ActionBox box({0.3, 0.4}, 0.01, 3);
  NodeField S(g, box);
  std::vector<double> rho{0.3, 0.4};
  auto [u, v] = canonical_change(S, rho);
  for (const auto& f : u) EXPECT_EQ(analytic_norm(f, 0.0), 0.0);
  for (const auto& f : v) EXPECT_EQ(analytic_norm(f, 0.0), 0.0);
  std::vector<double> phi{1.0, 2.0};
  auto pc = apply_change(S, phi, 0.5, rho);
  EXPECT_EQ(pc.theta, phi);
  EXPECT_EQ(pc.I, rho);
  EXPECT_EQ(pc.dS_dt, 0.0);
}

// S = c cos(theta_1) does not depend on rho: theta = phi and I_1 = rho_1 - c sin(phi_1).
TEST(CanonicalChange, ActionFreeGenerator) {
  spectral::Grid g{2, 8, 4};
  ActionBox box({0.3, 0.4}, 0.01, 3);
  NodeField S(g, box);
  const double c = 1e-3;
  for (auto& a : S.at) kt::add_mode(a, g, {1, 0}, 0, 0.5 * c);
  std::vector<double> rho{0.3, 0.4};
  auto [u, v] = canonical_change(S, rho);
  for (double x : {0.0, 0.8, 3.9}) {
    std::vector<double> phi{x, 1.0};
    EXPECT_NEAR(u[0].evaluate(phi, 0.2), -c * std::sin(x), 1e-15);
    EXPECT_NEAR(u[1].evaluate(phi, 0.2), 0.0, 1e-15);
    EXPECT_NEAR(v[0].evaluate(phi, 0.2), 0.0, 1e-15);
    auto pc = apply_change(S, phi, 0.2, rho);
    EXPECT_NEAR(pc.I[0], rho[0] - c * std::sin(x), 1e-15);
  }
}

TEST(CanonicalChange, StrongTwistIsRejected) {
  spectral::Grid g{2, 8, 4};
  ActionBox box({0.0, 0.0}, 0.1, 3);
  NodeField S(g, box);
  for (int n = 0; n < box.node_count(); ++n) kt::add_mode(S.at[n], g, {1, 0}, 0, 0.5 * box.node(n)[0]);
  std::vector<double> rho{0.0, 0.0};
  EXPECT_THROW(canonical_change(S, rho), ContractionFailure);
}

TEST(NormalFormParams, Schedules) {
  NormalFormParams p;
  EXPECT_DOUBLE_EQ(p.s(2), p.s0 / 4);
  EXPECT_DOUBLE_EQ(p.tau(3), p.tau0 / 8);
  EXPECT_EQ(p.K(0, std::exp(-1.0), 1000), 6);  // ceil(3 * 1 / 0.5)
  EXPECT_EQ(p.K(5, 0.1, 40), 40);
  EXPECT_EQ(NormalFormParams::theory_m0(2, 1.0, 0.0), 2 + 400);
}
