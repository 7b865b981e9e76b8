#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kamforge/duffing.hpp"
#include "kamforge/kam.hpp"
#include "kamforge/normal_form.hpp"
#include "kamforge/spectral.hpp"

namespace kamforge {

/// Quasi-periodic torus of the scaled network, parametrised by phi in T^d and t:
///   phi_spec = phi + theta_map(phi, t),  J = action_map(phi, t)
/// in the canonical coordinates of the HamiltonianSpec it came from. The flow
/// moves phi with constant `frequency`.
struct TorusEmbedding {
  int d = 0;
  int n = 1;
  double A_tilde = 10.0;
  std::vector<double> frequency;  // eps^{-a} omega(I0)
  std::vector<double> I0;         // canonical actions of the expansion point
  spectral::Grid grid;
  std::vector<spectral::Coeffs> theta_map;  // d
  std::vector<spectral::Coeffs> action_map; // d

  std::pair<std::vector<double>, std::vector<double>> angle_action(std::span<const double> phi, double t) const;
  /// (X, Y) with x = A X, xdot = A^{n+1} Y.
  std::pair<std::vector<double>, std::vector<double>> scaled_state(const ActionAngleMap& map,
                                                                   std::span<const double> phi, double t) const;
  /// (x, xdot) of the original network.
  std::pair<std::vector<double>, std::vector<double>> state(const ActionAngleMap& map, std::span<const double> phi,
                                                            double t) const;
};

struct TorusParams {
  int n_angle = 64;     // base grid per angle
  int n_time = 32;      // time slices
  int n_out = 32;       // output angle grid
  double drop = 1e-17;  // relative size below which modes are skipped in off-grid sums
};

struct TorusReport {
  int max_iterations = 0;   // fixed point, any stage
  double max_excursion = 0; // largest |rho - centre| / radius over stages with a box
  double max_reparam = 0;   // sup |phi - phi_spec|
};

/// Pulls the torus rho = 0 of the last KAM state back through every change:
/// KAM steps, the shift to I_*, the time-averaging change and the normal-form
/// steps. `nf.changes` and `kam.changes` must be complete.
TorusEmbedding extract_torus(const HamiltonianSpec& spec, const ScaledSystem& sys, const NormalFormRun& nf,
                             const TimeAveraged& ta, const AveragedForm& F, const KamRun& kam,
                             const TorusParams& tp = {}, TorusReport* report = nullptr);

struct DefectReport {
  double max_defect = 0.0;   // sup over samples of |state - torus| in scaled coordinates
  double mean_defect = 0.0;
  std::size_t samples = 0;
  std::size_t escaped = 0;   // escaped orbits count as infinite defect
};

/// Starts the network on the torus at random (phi, t), integrates for T_check
/// and compares with the torus image of phi + frequency T_check.
DefectReport invariance_defect(const TorusEmbedding& torus, const ScaledSystem& sys, const ActionAngleMap& map,
                               double T_check, std::size_t samples, std::uint64_t seed, double h = 0.0);

std::string to_json(const TorusEmbedding& torus);
TorusEmbedding torus_from_json(const std::string& text);

}  // namespace kamforge
