#pragma once

#include <span>
#include <vector>

#include "kamforge/chebyshev.hpp"
#include "kamforge/fourier.hpp"
#include "kamforge/spectral.hpp"

namespace kamforge {

/// Action-dependent Fourier field: one dense coefficient array per Chebyshev
/// node of an ActionBox. f(theta, t, I) is the tensor Chebyshev interpolant of
/// the nodal Fourier series.
struct NodeField {
  spectral::Grid grid;
  ActionBox box;
  std::vector<spectral::Coeffs> at;

  NodeField() = default;
  NodeField(const spectral::Grid& g, const ActionBox& b);

  int node_count() const { return static_cast<int>(at.size()); }
  /// sum_n w_n at[n]
  spectral::Coeffs combine(std::span<const double> w) const;
  spectral::Coeffs at_action(std::span<const double> I) const;
  double evaluate(std::span<const double> theta, double t, std::span<const double> I) const;

  NodeField interpolate(const ActionBox& target) const;
  NodeField derive_action(int j, int p = 1) const;
  NodeField derive_angle(int j) const;
  NodeField derive_time() const;
  NodeField angle_mean() const;

  /// sum over modes of max over nodes |c| e^{s order}; k = 0 skipped on request.
  double norm(double s, bool skip_angle_mean = false) const;
  double reality_defect() const;

  NodeField& operator+=(const NodeField& o);
  NodeField& operator-=(const NodeField& o);
  NodeField& operator*=(double a);
};

FourierField to_field(const NodeField& f, std::span<const double> I, double s = 1.0);

}  // namespace kamforge
