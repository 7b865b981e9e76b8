#pragma once

// The whole reduction chain for the two-oscillator network in configs/,
// kept with every intermediate state so tests can probe each change.

#include <string>
#include <vector>

#include "kamforge/duffing.hpp"
#include "kamforge/io.hpp"
#include "kamforge/kam.hpp"
#include "kamforge/normal_form.hpp"

#ifndef KAMFORGE_CONFIG_DIR
#error "KAMFORGE_CONFIG_DIR must point at configs/"
#endif

namespace kamforge::testing {

inline DuffingNetwork reference_network() {
  return network_from_json(io::read_file(std::string(KAMFORGE_CONFIG_DIR) + "/network_m2n1.json"));
}

struct Chain {
  ScaledSystem sys;
  ActionAngleMap map{1, 2};
  HamiltonianSpec spec;
  NormalFormRun nf;
  TimeAveraged ta;
  std::vector<double> I_star;
  AveragedForm F;
  KamRun kam;
};

// Cheap default: 16 x 8 grid, 5 nodes, two normal-form steps. Eight time
// slices leave the first step conjugate only to about 1e-7; 24 x 12 gets 1e-10.
inline NormalFormParams cheap_params(int n_angle = 16, int n_time = 8) {
  NormalFormParams p;
  p.tau0 = 0.003;
  p.steps = 2;
  p.nodes = 5;
  p.n_angle = n_angle;
  p.n_time = n_time;
  return p;
}

inline HamiltonianSpec reference_spec(const ScaledSystem& sys, const ActionAngleMap& map, const NormalFormParams& p,
                                      std::vector<double> I0 = {1.2952, 1.7846}) {
  DiophantineParams dc;
  dc.eps = sys.eps();
  dc.a = sys.a();
  const std::vector<double> lo{1.0, 1.0}, hi{2.0, 2.0};
  return to_hamiltonian_spec(sys, map, I0, lo, hi, p, dc);
}

inline Chain build_chain(double A_tilde = 10.0, const NormalFormParams& p = cheap_params(), int kam_steps = 3,
                         double kam_radius = 0.25) {
  Chain c;
  c.sys = ScaledSystem{reference_network(), A_tilde};
  c.spec = reference_spec(c.sys, c.map, p);
  c.nf = run_normal_form(c.spec, true);
  c.ta = time_average(c.spec, c.nf.final_state());
  c.I_star = locate_expansion_point(c.spec, c.ta.h_avg);
  c.F = taylor_split(c.spec, c.I_star, c.ta, kam_radius * c.nf.final_state().tau, 5);
  KamParams kp;
  kp.max_steps = kam_steps;
  kp.tol = 0.0;
  c.kam = kam_iterate(c.F, kp, c.spec.dc, true);
  return c;
}

}  // namespace kamforge::testing
