#pragma once

#include <span>
#include <string>
#include <vector>

#include "kamforge/fourier.hpp"
#include "kamforge/hamiltonian.hpp"
#include "kamforge/oscillator.hpp"

namespace kamforge {

/// x_j'' + x_j^{2n+1} + dF/dx_j = 0 with F(x, t) = sum_alpha p_alpha(t) x^alpha.
struct DuffingNetwork {
  struct Term {
    std::vector<int> alpha;
    FourierField p;  // d = 0: a real function of t alone, period 2 pi
  };

  int m = 1;
  int n = 1;
  std::vector<Term> terms;

  void add_term(std::vector<int> alpha, FourierField p);
  void validate() const;
  /// Largest |l| over the time coefficients.
  int max_time_mode() const;

  double potential(std::span<const double> x, double t) const;
  /// dF/dx written to grad (length m).
  void potential_gradient(std::span<const double> x, double t, std::span<double> grad) const;
};

DuffingNetwork network_from_json(const std::string& text);
std::string to_json(const DuffingNetwork& net);

/// Right-hand side (x', x'') of the network equations.
std::pair<std::vector<double>, std::vector<double>> vector_field(const DuffingNetwork& net,
                                                                 std::span<const double> x,
                                                                 std::span<const double> xdot, double t);

/// Energy of a lone oscillator: v^2/2 + x^{2n+2}/(2n+2).
double oscillator_energy(int n, double x, double v);

struct Trajectory {
  int m = 0;
  std::vector<double> t;
  std::vector<double> x;  // samples x m
  std::vector<double> v;
  bool escaped = false;
  double escape_time = 0.0;

  std::size_t size() const { return t.size(); }
};

/// Sixth-order symplectic integration in extended phase space. Stores every
/// `stride`-th step (and the initial point). Escape (|x| > 1e8) stops early.
Trajectory integrate(const DuffingNetwork& net, std::span<const double> x0, std::span<const double> v0, double T,
                     double h, int stride = 1);

/// Advances (x, v, t) in place by `steps` steps of size h; returns false on escape.
bool advance(const DuffingNetwork& net, std::vector<double>& x, std::vector<double>& v, double& t, double h,
             long steps);

/// Step of about T_local/256 for the fastest oscillator of amplitude up to `amplitude`.
double default_step(int n, double amplitude);

struct ScaledSystem {
  DuffingNetwork network;
  double A_tilde = 10.0;

  double eps() const { return 1.0 / A_tilde; }
  double a() const { return network.n; }
  double b() const { return network.n - 1; }
  /// x = A x_s, xdot = A^{n+1} y.
  void to_original(std::span<const double> xs, std::span<const double> y, std::vector<double>& x,
                   std::vector<double>& v) const;
  void to_scaled(std::span<const double> x, std::span<const double> v, std::vector<double>& xs,
                 std::vector<double>& y) const;
};

/// H0(J) in canonical units phi = 2 pi theta, J = I / (2 pi):
///   c^{2b}/(2(n+1)) sum_j (2 pi J_j)^{2(n+1)/(n+2)}.
IntegrableHamiltonian duffing_h0(const ActionAngleMap& map);

/// Samples R = eps^b A^{-(n+2)} F(A x_s(phi, J), t) on the Chebyshev nodes of
/// B(tau0) around J0 = I0/(2 pi). `I0` and the box [lo, hi] are in the
/// oscillator's action units.
HamiltonianSpec to_hamiltonian_spec(const ScaledSystem& sys, const ActionAngleMap& map,
                                    std::span<const double> I0, std::span<const double> box_lo,
                                    std::span<const double> box_hi, const NormalFormParams& params,
                                    const DiophantineParams& dc, double* alias_mass = nullptr);

struct StabilityMetrics {
  double sup_norm = 0.0;
  double action_variation = 0.0;  // max_j,t |I_j(t)/I_j(0) - 1|
  bool escaped = false;
};
StabilityMetrics stability_metrics(const Trajectory& traj, int n);

/// Mean angular frequencies (2 pi / time units) of the scaled angles along a
/// trajectory of the original system.
std::vector<double> rotation_vector(const Trajectory& traj, const ActionAngleMap& map, double A_tilde);

}  // namespace kamforge
