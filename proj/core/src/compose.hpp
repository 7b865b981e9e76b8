#pragma once

// Shared machinery for changes of variables: nodal fields sampled on a fine
// grid, per-point action interpolation, and slice-wise pullback.

#include <vector>

#include "kamforge/node_field.hpp"
#include "kamforge/spectral.hpp"

namespace kamforge::detail {

/// Real values of c (on `work`) at the points of `fine`.
std::vector<double> fine_values(const spectral::Coeffs& c, const spectral::Grid& work, const spectral::Grid& fine);

/// Point-major fine values of every node: out[p * nodes + n].
std::vector<double> fine_values(const NodeField& f, const spectral::Grid& fine);

/// Time-only values of the k = 0 row of every node: out[it * nodes + n].
std::vector<double> fine_time_values(const NodeField& f, int n_time_fine);

inline double dot(const double* w, const double* v, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += w[i] * v[i];
  return s;
}

/// Re-expands integrands in the new angles theta + shift(theta, t), slice by
/// slice in time; results are coefficient arrays on `work`.
class SlicePullback {
 public:
  SlicePullback(const spectral::Grid& work, const spectral::Grid& fine);
  /// shift[j] and det are fine-grid value arrays; outputs match integrands.
  void run(const std::vector<const double*>& shift, const double* det,
           const std::vector<const double*>& integrands, std::vector<spectral::Coeffs*> outputs) const;

 private:
  spectral::Grid work_, fine_;
};

/// Largest spectral norm of J = d shift / d theta over the points; J is given
/// as d*d value arrays, entry (i, j) = d shift_i / d theta_j.
double max_operator_norm(const std::vector<const double*>& jac, int d, std::size_t points);

/// det(I + J) at every point.
std::vector<double> jacobian_det(const std::vector<const double*>& jac, int d, std::size_t points);

}  // namespace kamforge::detail
