#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "chain.hpp"
#include "kamforge/torus.hpp"

using namespace kamforge;
namespace kt = kamforge::testing;

namespace {

TorusParams small_grid() {
  TorusParams tp;
  tp.n_angle = 32;
  tp.n_time = 16;
  tp.n_out = 16;
  return tp;
}

// Every stage of the reduction for a network with the given coupling.
struct Reduced {
  kt::Chain c;
  TorusEmbedding torus;
  TorusReport report;
};

Reduced reduce(DuffingNetwork net) {
  Reduced r;
  auto& c = r.c;
  c.sys = ScaledSystem{std::move(net), 10.0};
  auto p = kt::cheap_params();
  c.spec = kt::reference_spec(c.sys, c.map, p);
  c.nf = run_normal_form(c.spec, true);
  c.ta = time_average(c.spec, c.nf.final_state());
  c.I_star = locate_expansion_point(c.spec, c.ta.h_avg);
  c.F = taylor_split(c.spec, c.I_star, c.ta, 0.25 * c.nf.final_state().tau, 5);
  KamParams kp;
  kp.max_steps = 3;
  c.kam = kam_iterate(c.F, kp, c.spec.dc, true);
  r.torus = extract_torus(c.spec, c.sys, c.nf, c.ta, c.F, c.kam, small_grid(), &r.report);
  return r;
}

const Reduced& free_pair() {
  static const Reduced r = [] {
    DuffingNetwork net;
    net.m = 2;
    net.n = 1;
    return reduce(net);
  }();
  return r;
}

const Reduced& coupled_pair() {
  static const Reduced r = reduce(kt::reference_network());
  return r;
}

}  // namespace

TEST(Torus, FreeNetworkGivesFlatTorus) {
  const auto& r = free_pair();
  const auto& T = r.torus;
  EXPECT_EQ(T.d, 2);
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(T.frequency[j], r.c.spec.frequency(r.c.spec.I0)[j], 1e-12);
  for (double a : {0.0, 1.3, 4.4})
    for (double t : {0.0, 2.0}) {
      std::vector<double> phi{a, 2.0 * a};
      auto [th, J] = T.angle_action(phi, t);
      for (int j = 0; j < 2; ++j) {
        EXPECT_NEAR(std::remainder(th[j] - phi[j], 2.0 * std::numbers::pi), 0.0, 1e-13);
        EXPECT_NEAR(J[j], r.c.spec.I0[j], 1e-13);
      }
    }
  EXPECT_LT(r.report.max_reparam, 1e-13);
}

TEST(Torus, FreeNetworkTorusIsInvariant) {
  const auto& r = free_pair();
  auto rep = invariance_defect(r.torus, r.c.sys, r.c.map, 20.0, 4, 3);
  EXPECT_EQ(rep.samples, 4u);
  EXPECT_EQ(rep.escaped, 0u);
  EXPECT_LT(rep.max_defect, 1e-9);
}

TEST(Torus, StateMatchesScaling) {
  const auto& r = free_pair();
  std::vector<double> phi{0.3, 1.9};
  auto [X, Y] = r.torus.scaled_state(r.c.map, phi, 0.5);
  auto [x, v] = r.torus.state(r.c.map, phi, 0.5);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(x[j], 10.0 * X[j], 1e-12 * std::abs(x[j]) + 1e-14);
    EXPECT_NEAR(v[j], 100.0 * Y[j], 1e-12 * std::abs(v[j]) + 1e-14);
  }
}

TEST(Torus, CoupledTorusIsNearlyInvariant) {
  const auto& r = coupled_pair();
  EXPECT_GT(r.report.max_reparam, 0.0);
  EXPECT_LT(r.report.max_excursion, 1.0);
  auto rep = invariance_defect(r.torus, r.c.sys, r.c.map, 10.0, 4, 5);
  EXPECT_EQ(rep.escaped, 0u);
  EXPECT_LT(rep.max_defect, 1e-4);
  EXPECT_LE(rep.mean_defect, rep.max_defect);
}

TEST(Torus, EmbeddingIsReal) {
  const auto& T = coupled_pair().torus;
  for (const auto& c : T.theta_map) EXPECT_LT(spectral::to_field(c, T.grid).reality_defect(), 1e-15);
  for (const auto& c : T.action_map) EXPECT_LT(spectral::to_field(c, T.grid).reality_defect(), 1e-15);
}

// The writer drops roundoff-level modes, so the text form is canonical: exact
// after one pass, and within roundoff of the in-memory coefficients.
TEST(Torus, JsonRoundTrip) {
  const auto& T = coupled_pair().torus;
  auto back = torus_from_json(to_json(T));
  EXPECT_EQ(back.d, T.d);
  EXPECT_EQ(back.n, T.n);
  EXPECT_EQ(back.A_tilde, T.A_tilde);
  EXPECT_EQ(back.frequency, T.frequency);
  EXPECT_EQ(back.I0, T.I0);
  ASSERT_EQ(back.theta_map.size(), T.theta_map.size());
  auto close = [](const spectral::Coeffs& a, const spectral::Coeffs& b) {
    ASSERT_EQ(a.size(), b.size());
    double top = 0.0;
    for (auto x : b) top = std::max(top, std::abs(x));
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(std::abs(a[i] - b[i]), 1e-15 * top) << i;
  };
  for (std::size_t j = 0; j < T.theta_map.size(); ++j) {
    close(back.theta_map[j], T.theta_map[j]);
    close(back.action_map[j], T.action_map[j]);
  }
  EXPECT_EQ(to_json(back), to_json(T));
  EXPECT_EQ(to_json(torus_from_json(to_json(back))), to_json(back));
}
