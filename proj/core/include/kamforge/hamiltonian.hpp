#pragma once

#include <span>
#include <vector>

#include "kamforge/diophantine.hpp"
#include "kamforge/node_field.hpp"

namespace kamforge {

/// Action-only Hamiltonian
///   H0(J) = sum_j coef J_j^p + <lin, J> + 1/2 <M J, J>.
/// Either part may be absent. The power part needs J > 0.
class IntegrableHamiltonian {
 public:
  IntegrableHamiltonian() = default;
  static IntegrableHamiltonian power_law(int d, double coef, double p);
  static IntegrableHamiltonian quadratic(std::vector<double> lin, std::vector<double> M);

  int dim() const { return d_; }
  double value(std::span<const double> J) const;
  std::vector<double> gradient(std::span<const double> J) const;
  /// Row-major d x d.
  std::vector<double> hessian(std::span<const double> J) const;
  /// d^3 entries, index (i*d + j)*d + k.
  std::vector<double> third(std::span<const double> J) const;
  /// H0(J + x) minus its Taylor polynomial of degree < order at J (order 1..3),
  /// summed without cancellation.
  double remainder(std::span<const double> J, std::span<const double> x, int order) const;

  double power_coef() const { return coef_; }
  double power_exponent() const { return p_; }

 private:
  int d_ = 0;
  double coef_ = 0.0;
  double p_ = 0.0;
  std::vector<double> lin_;
  std::vector<double> M_;
};

/// (1 + y)^p - sum_{k < order} binom(p, k) y^k, accurate for small y.
double binomial_tail(double p, double y, int order);

/// Schedules and sizes of the finite normal-form stage.
struct NormalFormParams {
  double s0 = 0.5;           // initial angle width
  double tau0 = 0.02;        // initial action radius
  int steps = 4;             // applied step count; theory_m0 gives the count the estimates need
  double tail_factor = 3.0;  // K_j = tail_factor log(1/eps) / s_j, capped by the grid
  int nodes = 7;             // Chebyshev nodes per action axis
  int n_angle = 32;
  int n_time = 16;
  int oversample = 2;        // fine grid factor for compositions

  double s(int j) const;
  double tau(int j) const;
  int K(int j, double eps, int cap) const;
  /// A = 200 d (a + b) and m0 = 2 + floor((b + A)/(a - b)); documentation only.
  static double theory_A(int d, double a, double b);
  static int theory_m0(int d, double a, double b);
};

/// H = eps^{-a} H0(J) + eps^{-b} R(phi, t, J) in 2pi-periodic angles phi and
/// canonical actions J. R is carried on Chebyshev nodes of B(tau0) around I0.
struct HamiltonianSpec {
  int d = 0;
  double eps = 0.1;
  double a = 1.0;
  double b = 0.0;
  IntegrableHamiltonian H0;
  NodeField R;
  std::vector<double> I0;
  NormalFormParams params;
  DiophantineParams dc;

  spectral::Grid grid() const { return R.grid; }
  double value(std::span<const double> phi, double t, std::span<const double> J) const;
  /// eps^{-a} grad H0.
  std::vector<double> frequency(std::span<const double> J) const;
  /// Smallest |det Hess H0| over an n^d grid on the box [lo, hi]^d.
  double min_hessian_det(std::span<const double> lo, std::span<const double> hi, int n = 8) const;
  void validate() const;
};

}  // namespace kamforge
