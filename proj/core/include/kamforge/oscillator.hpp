#pragma once

#include <span>
#include <utility>
#include <vector>

#include "kamforge/fourier.hpp"

namespace kamforge {

/// Minimal period of x'' + x^{2n+1} = 0 on the orbit through (1, 0).
double compute_period(int n);

/// The solution (u0, v0) of x'' + x^{2n+1} = 0 with u0(0) = 1, v0(0) = 0.
struct ReferenceOrbit {
  int n = 1;
  double T0 = 0.0;
  std::vector<double> u;  // samples at t = j T0 / N
  std::vector<double> v;
  FourierField fourier_u;  // in psi = 2 pi t / T0
  FourierField fourier_v;

  /// Evaluation at time t via the Fourier series (any t, periodic).
  double u0(double t) const;
  double v0(double t) const;
  /// Both at once, cheaper than two calls.
  std::pair<double, double> state(double t) const;

  // Real trigonometric coefficients a_k cos(k psi) + b_k sin(k psi), k = 0..N/2-1.
  std::vector<double> au, bu, av, bv;
};

/// Samples the reference orbit with a sixth-order symplectic integrator.
/// N must be a power of two >= 64.
ReferenceOrbit reference_solution(int n, int N = 256);

/// Phi: (theta, I) -> (x, y), theta in [0,1) per oscillator:
///   x = c^a I^a u0(theta T0),  y = c^b I^b v0(theta T0),  a = 1/(n+2), b = 1 - a, c = 1/(a T0).
class ActionAngleMap {
 public:
  ActionAngleMap(int n, int m, int samples = 256);

  int n() const { return n_; }
  int m() const { return m_; }
  double alpha() const { return alpha_; }
  double beta() const { return 1.0 - alpha_; }
  double c() const { return c_; }
  double T0() const { return orbit_.T0; }
  const ReferenceOrbit& orbit() const { return orbit_; }

  std::pair<std::vector<double>, std::vector<double>> from_action_angle(std::span<const double> theta,
                                                                        std::span<const double> I) const;
  std::pair<std::vector<double>, std::vector<double>> to_action_angle(std::span<const double> x,
                                                                      std::span<const double> y) const;

  // Single-oscillator pieces.
  std::pair<double, double> forward(double theta, double I) const;
  std::pair<double, double> inverse(double x, double y) const;
  /// c^{2b}/(2(n+1)) I^{2(n+1)/(n+2)}: energy of the orbit with action I.
  double energy(double I) const;
  double action_of_energy(double E) const;

 private:
  int n_, m_;
  double alpha_, c_;
  ReferenceOrbit orbit_;
};

}  // namespace kamforge
