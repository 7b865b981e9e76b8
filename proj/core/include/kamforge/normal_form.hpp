#pragma once

#include <span>
#include <utility>
#include <vector>

#include "kamforge/errors.hpp"
#include "kamforge/fourier.hpp"
#include "kamforge/hamiltonian.hpp"
#include "kamforge/node_field.hpp"

namespace kamforge {

/// H^{(j)} = eps^{-a} H0(J) + h(t, J) + R(phi, t, J) + R_plus(phi, t, J), all
/// three fields on the Chebyshev nodes of B(tau_j). h keeps only k = 0 modes.
struct NormalFormState {
  int j = 0;
  double s = 0.0;
  double tau = 0.0;
  int K = 0;
  NodeField h;
  NodeField R;
  NodeField R_plus;

  double value(const HamiltonianSpec& spec, std::span<const double> phi, double t,
               std::span<const double> J) const;
};

struct StepDiagnostics {
  int j = 0;
  double norm_h = 0.0;
  double norm_R = 0.0;       // angle-dependent part of R at width s_j
  double norm_R_plus = 0.0;
  int K = 0;
  double s = 0.0;
  double tau = 0.0;
  double decay = 0.0;        // norm_R(j) / norm_R(j-1); 0 at j = 0
  double min_divisor = 0.0;  // of the step leaving j
  double contraction = 0.0;  // largest |d^2 S / d theta d rho|
  double max_shift = 0.0;    // largest |d S / d theta| relative to tau_j / 2
  double reality = 0.0;
};

StepDiagnostics diagnostics(const NormalFormState& st);

/// R^{(0)} = eps^{-b} Gamma_{K0} R, R_plus^{(0)} = eps^{-b} (1 - Gamma_{K0}) R, h = 0.
NormalFormState split_tail(const HamiltonianSpec& spec);

/// S(k,l) = i R(k,l) / (eps^{-a} <k, omega> + l) for k != 0 and |k| + |l| <= K.
/// Throws DcFailure when a divisor with non-zero coefficient drops below
/// eps^{-a} gamma / (2 |k|^{d+1}).
FourierField solve_homological(const FourierField& R, std::span<const double> omega, double eps, double a, int K,
                               const DiophantineParams& dc);
/// Node-wise version with omega = grad H0 at each node.
NodeField solve_homological(const NodeField& R, const IntegrableHamiltonian& H0, double eps, double a, int K,
                            const DiophantineParams& dc, double* min_divisor = nullptr);

/// Checks the divisors of every non-zero mode of c (k != 0 unless
/// include_zero_angle) against the two-regime bound, halved when `halved`.
void check_divisors(const spectral::Coeffs& c, const spectral::Grid& g, std::span<const double> freq,
                    const DiophantineParams& dc, bool include_zero_angle, bool halved);

/// Generating-function change I = rho + d_theta S(theta, t, rho),
/// phi = theta + d_rho S(theta, t, rho), solved for (theta, I) at a point.
struct PointChange {
  std::vector<double> theta;
  std::vector<double> I;
  double dS_dt = 0.0;  // at (theta, t, rho)
  int iterations = 0;
};
PointChange apply_change(const NodeField& S, std::span<const double> phi, double t, std::span<const double> rho);

/// u, v with I = rho + u(phi, t), theta = phi + v(phi, t) at fixed rho, as
/// Fourier fields in phi. Throws ContractionFailure if |d^2S/dtheta drho| > 1/2.
std::pair<std::vector<FourierField>, std::vector<FourierField>> canonical_change(const NodeField& S,
                                                                                std::span<const double> rho,
                                                                                int oversample = 2);

/// One step j -> j+1 with the generating function solved on B(tau_{j+1}).
/// `S_out` receives the generating function.
NormalFormState push_forward(const HamiltonianSpec& spec, const NormalFormState& st, NodeField* S_out = nullptr,
                             StepDiagnostics* diag = nullptr);

struct NormalFormRun {
  std::vector<NormalFormState> states;  // j = 0..steps (only the last when not kept)
  std::vector<NodeField> changes;       // S_1..S_steps
  std::vector<StepDiagnostics> log;     // one row per state
  const NormalFormState& final_state() const { return states.back(); }
};
NormalFormRun run_normal_form(const HamiltonianSpec& spec, bool keep_states = true);

/// The change killing the time dependence of h: S~(t, J) with
/// d_t S~ = [h] - h, and R~(phi - d_J S~, t, J).
struct TimeAveraged {
  NodeField h_avg;    // (0,0) mode only
  NodeField S_tilde;  // k = 0, l != 0
  NodeField R_breve;
  double value(const HamiltonianSpec& spec, std::span<const double> phi, double t,
               std::span<const double> J) const;
};
TimeAveraged time_average(const HamiltonianSpec& spec, const NormalFormState& last);

/// Newton for eps^{-a} grad H0(I) + grad [h](I) = eps^{-a} grad H0(I0).
std::vector<double> locate_expansion_point(const HamiltonianSpec& spec, const NodeField& h_avg,
                                           double* residual = nullptr, int max_iter = 50);

/// R_low = R0 + <R1, rho> + <R2 rho, rho>, coefficient arrays on one grid.
struct ActionJet {
  spectral::Grid grid;
  spectral::Coeffs r0;
  std::vector<spectral::Coeffs> r1;  // d
  std::vector<spectral::Coeffs> r2;  // d*d, symmetric
  double value(std::span<const double> theta, double t, std::span<const double> rho) const;
};
/// Jet of a nodal field at an action point (r2 = half the Hessian).
ActionJet action_jet(const NodeField& P, std::span<const double> at);

/// H = N(rho) + Q(rho) + P(theta, t, rho) around I_*, with
/// N = eps^{-a}(<omega, rho> + <Omega rho, rho>) and Q the exact cubic
/// remainder of eps^{-a} H0 + [h]. P lives on a box of radius r0 around 0.
struct AveragedForm {
  int d = 0;
  double eps = 0.1, a = 1.0;
  std::vector<double> I_star;
  std::vector<double> omega;   // omega(I0), unscaled
  std::vector<double> Omega;   // d x d
  IntegrableHamiltonian H0;
  // [h] as nodal scalars and its jet at I_*; hbar is empty when [h] = 0.
  ActionBox hbar_box;
  std::vector<double> hbar;
  double hbar0 = 0.0;
  std::vector<double> hbar1, hbar2, hbar3;
  NodeField P;
  ActionJet low;
  double cubic_bound = 0.0;    // sup |R_high| / |rho|^3 sampled at r0/2
  double cubic_bound_half = 0.0;  // same at r0/4
  double E = 0.0;              // A - 9b - 1, documentation only

  std::vector<double> frequency() const;  // eps^{-a} omega
  double Q(std::span<const double> rho) const;
  /// d^3 Q(0), d^3 entries.
  std::vector<double> Q3() const;
  double N(std::span<const double> rho) const;
  double value(std::span<const double> theta, double t, std::span<const double> rho) const;
};

AveragedForm taylor_split(const HamiltonianSpec& spec, std::span<const double> I_star, const TimeAveraged& ta,
                          double r0, int nodes = 5);

}  // namespace kamforge
