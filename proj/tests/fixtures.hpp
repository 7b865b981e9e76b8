#pragma once

// Small synthetic systems shared by the tests.

#include <cmath>
#include <random>
#include <vector>

#include "kamforge/hamiltonian.hpp"
#include "kamforge/normal_form.hpp"

namespace kamforge::testing {

inline void add_mode(spectral::Coeffs& c, const spectral::Grid& g, std::vector<int> k, int l, complex v) {
  std::size_t i;
  if (!spectral::encode(g, k, l, &i)) return;
  c[i] += v;
  for (int& x : k) x = -x;
  spectral::encode(g, k, -l, &i);
  c[i] += std::conj(v);
}

// eps^{-1} H0 + R on an n_angle^2 x n_time grid; H0 quadratic with frequency about
// (7.1, 8.9) at I0 and R a handful of action-dependent modes of size `size`.
inline HamiltonianSpec synthetic_spec(double size = 1e-3, int steps = 2, int n_angle = 16, int n_time = 8) {
  HamiltonianSpec s;
  s.d = 2;
  s.eps = 0.1;
  s.a = 1.0;
  s.b = 0.0;
  s.I0 = {0.3, 0.4};
  // grad H0(I0) = lin + M I0
  std::vector<double> M = {1.0, 0.1, 0.1, 1.2};
  std::vector<double> lin = {0.7071067811865476 - 0.34, 0.8944271909999159 - 0.51};
  s.H0 = IntegrableHamiltonian::quadratic(lin, M);
  s.params.tau0 = 0.02;
  s.params.steps = steps;
  s.params.nodes = 5;
  s.params.n_angle = n_angle;
  s.params.n_time = n_time;
  s.dc.eps = s.eps;
  s.dc.a = s.a;
  spectral::Grid g{2, n_angle, n_time};
  ActionBox box(s.I0, s.params.tau0, s.params.nodes);
  s.R = NodeField(g, box);
  for (int n = 0; n < box.node_count(); ++n) {
    auto J = box.node(n);
    auto& c = s.R.at[n];
    const double x = J[0] - s.I0[0], y = J[1] - s.I0[1];
    add_mode(c, g, {1, -1}, 1, size * complex(1.0 + 3.0 * x, 0.5));
    add_mode(c, g, {1, 2}, 0, size * complex(0.4, -0.3 + 5.0 * y * y));
    add_mode(c, g, {2, 0}, 2, size * complex(0.25 + x * y, 0.0));
    add_mode(c, g, {0, 1}, -1, size * complex(0.0, 0.3 + 2.0 * y));
    add_mode(c, g, {3, -2}, 1, size * complex(0.05, 0.05));
    add_mode(c, g, {0, 0}, 1, size * complex(0.2 + x, 0.1));
    add_mode(c, g, {0, 0}, 0, complex(size * (x + 3.0 * y * y), 0.0));
  }
  return s;
}

struct PlantedMode {
  std::vector<int> k;
  int l;
};

// Averaged form with quadratic H0 (so Q = 0) and a planted perturbation
// P = scale * sum_k e^{-decay |k,l|} (a_k + <b_k, rho> + <C_k rho, rho> + cubic) cos(k.theta + l t + phase)
// with random coefficients.
inline AveragedForm planted_form(const std::vector<PlantedMode>& modes, double decay, double scale, double r0,
                                 unsigned seed, int n_angle = 16, int n_time = 8) {
  AveragedForm F;
  F.d = 2;
  F.eps = 0.1;
  F.a = 1.0;
  F.I_star = {0.3, 0.4};
  std::vector<double> M = {1.0, 0.1, 0.1, 1.2};
  std::vector<double> lin = {0.7071067811865476 - 0.34, 0.8944271909999159 - 0.51};
  F.H0 = IntegrableHamiltonian::quadratic(lin, M);
  F.omega = F.H0.gradient(F.I_star);
  F.Omega = {0.5 * M[0], 0.5 * M[1], 0.5 * M[2], 0.5 * M[3]};
  spectral::Grid g{2, n_angle, n_time};
  ActionBox box({0.0, 0.0}, r0, 5);
  F.P = NodeField(g, box);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (const auto& m : modes) {
    double c[10];
    for (double& x : c) x = U(rng);
    const double w = std::exp(-decay * (std::abs(m.k[0]) + std::abs(m.k[1]) + std::abs(m.l)));
    for (int n = 0; n < box.node_count(); ++n) {
      auto r = box.node(n);
      double x = r[0], y = r[1];
      double v = c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y +
                 0.5 * (c[6] * x * x * x + c[7] * y * y * y + c[8] * x * x * y + c[9] * x * y * y);
      add_mode(F.P.at[n], g, m.k, m.l, complex(scale * w * v, scale * w * 0.3 * v));
    }
  }
  // The k = l = 0 row must be real.
  for (auto& a : F.P.at) a[0] = complex(a[0].real(), 0.0);
  F.low = action_jet(F.P, std::vector<double>{0.0, 0.0});
  return F;
}

// Three of the modes sit near resonance (divisors 0.13, 0.32, 0.45), so one
// step squares the error with a sizeable constant; the defaults give a low
// part of norm about 1e-4. The grid must hold the products of the |l| = 3
// modes: on 16 x 8 the mass falling off the grid after one step is as large
// as the error that remains.
inline AveragedForm synthetic_form(double scale = 4.3e-5, double r0 = 0.1, unsigned seed = 7, int n_angle = 24,
                                   int n_time = 24) {
  return planted_form({{{1, -1}, 2}, {{3, -2}, -3}, {{4, -3}, -1}, {{1, 0}, 1}, {{0, 1}, -1}, {{0, 0}, 1}, {{0, 0}, 0}},
                      1.1, scale, r0, seed, n_angle, n_time);
}

// `count` distinct random modes with |k_j| <= 4, |l| <= 3.
inline AveragedForm random_form(int count = 50, double scale = 1e-6, unsigned seed = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> K(-4, 4), L(-3, 3);
  std::vector<PlantedMode> modes;
  while (static_cast<int>(modes.size()) < count) {
    PlantedMode m{{K(rng), K(rng)}, L(rng)};
    bool dup = false;
    for (const auto& o : modes)
      dup = dup || (o.k == m.k && o.l == m.l) || (o.k[0] == -m.k[0] && o.k[1] == -m.k[1] && o.l == -m.l);
    if (!dup) modes.push_back(m);
  }
  return planted_form(modes, 0.3, scale, 0.01, seed);
}

}  // namespace kamforge::testing
