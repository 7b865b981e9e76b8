#pragma once

#include <span>
#include <vector>

#include "kamforge/errors.hpp"
#include "kamforge/normal_form.hpp"

namespace kamforge {

struct KamParams {
  int max_steps = 12;
  double tol = 1e-12;   // stop once e_m <= tol
  double s = 0.1;       // angle width of the norms
  int nodes = 5;        // Chebyshev nodes per action axis
  int oversample = 2;
  double max_contraction = 0.5;
};

/// H_m = eps^{-a}(<omega, rho> + <Omega_m rho, rho>) + Q(rho) + P_m(theta, t, rho),
/// up to constants. Q stays the one from the averaged form.
struct KamState {
  int m = 0;
  std::vector<double> Omega;
  NodeField P;  // box centred at rho = 0
  ActionJet low;
  double e = 0.0;  // max(|R0 - mean|, |R1|, |R2|) at width s
  double norm_R0 = 0.0, norm_R1 = 0.0, norm_R2 = 0.0;

  double value(const AveragedForm& F, std::span<const double> theta, double t, std::span<const double> rho) const;
};

/// The change (theta, t, I) -> (phi, t, rho) with
///   I = nu + rho + d_theta S,  phi = theta + d_rho S,
///   S = S0 + <S1, rho> + <S2 rho, rho>.
struct KamChange {
  spectral::Grid grid;
  spectral::Coeffs S0;
  std::vector<spectral::Coeffs> S1;  // d
  std::vector<spectral::Coeffs> S2;  // d*d, symmetric
  std::vector<double> nu;
  // Right-hand sides, kept for residual checks.
  spectral::Coeffs R0;
  std::vector<spectral::Coeffs> R_star;
  std::vector<spectral::Coeffs> R_2star;
  double min_divisor = 0.0;
  double contraction = 0.0;

  /// Solves phi = theta + d_rho S(theta, t, rho) for theta.
  PointChange apply(std::span<const double> phi, double t, std::span<const double> rho) const;
  /// The dropped constant eps^{-a}(<omega, nu> + <Omega nu, nu>).
  double dropped_constant(const AveragedForm& F, std::span<const double> Omega) const;
};

struct KamStepLog {
  int m = 0;
  double norm_R0 = 0.0, norm_R1 = 0.0, norm_R2 = 0.0;
  double nu = 0.0;
  double dOmega = 0.0;
  double e = 0.0;
  double radius = 0.0;
  double min_divisor = 0.0;
  double contraction = 0.0;
};

KamState kam_initial_state(const AveragedForm& F, const KamParams& kp);
/// Refreshes the jet and norms of a state after P changes.
void kam_measure(KamState& st, const KamParams& kp);

KamState kam_step(const AveragedForm& F, const KamState& st, const KamParams& kp, const DiophantineParams& dc,
                  KamChange* change = nullptr, KamStepLog* log = nullptr);

struct KamRun {
  std::vector<KamState> states;  // all states when kept, else first and last
  std::vector<KamChange> changes;
  std::vector<KamStepLog> log;    // one row per state
  bool converged = false;
  const KamState& final_state() const { return states.back(); }
};
KamRun kam_iterate(const AveragedForm& F, const KamParams& kp, const DiophantineParams& dc, bool keep_states = false);

}  // namespace kamforge
