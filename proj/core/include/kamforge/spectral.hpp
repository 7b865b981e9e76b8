#pragma once

// Dense coefficient arrays on a tensor (angle^d x time) grid. The pipeline
// works here; FourierField is the exchange format.

#include <cstddef>
#include <span>
#include <vector>

#include "kamforge/fourier.hpp"

namespace kamforge::spectral {

using Coeffs = std::vector<complex>;

/// Grid with n_angle points per angle and n_time points in time. Arrays are
/// row-major with time fastest; coefficient arrays use FFT index order.
/// Nyquist entries are kept at zero so that conjugate pairs are closed.
struct Grid {
  int d = 0;
  int n_angle = 0;
  int n_time = 1;

  std::size_t angle_points() const;
  std::size_t size() const { return angle_points() * static_cast<std::size_t>(n_time); }
  /// Largest wavenumber stored per angle / in time.
  int kmax() const { return n_angle / 2 - 1; }
  int lmax() const { return n_time == 1 ? 0 : n_time / 2 - 1; }
  int max_order() const { return d * kmax() + lmax(); }
  std::vector<int> shape() const;
  Grid refined(int factor_angle, int factor_time) const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

inline int wavenumber(int i, int n) { return i < (n + 1) / 2 ? i : i - n; }
inline int slot(int k, int n) { return k >= 0 ? k : k + n; }

/// Decodes flat index into per-angle wavenumbers (length d) and returns l.
int decode(const Grid& g, std::size_t idx, int* k);
/// Flat index of a mode; returns false when outside the stored range.
bool encode(const Grid& g, std::span<const int> k, int l, std::size_t* idx);
bool is_nyquist(const Grid& g, std::size_t idx);
int order(const Grid& g, std::size_t idx);

// Transforms. `to_coeffs` is normalised so that coefficients are Fourier
// coefficients; `to_values` synthesises the series on the grid.
Coeffs to_values(const Coeffs& c, const Grid& g);
Coeffs to_coeffs(const Coeffs& v, const Grid& g);
void to_values_inplace(Coeffs& c, const Grid& g);
void to_coeffs_inplace(Coeffs& v, const Grid& g);
/// Transforms only the time axis of an array shaped like `g`.
void time_to_values_inplace(Coeffs& c, const Grid& g);
void time_to_coeffs_inplace(Coeffs& v, const Grid& g);
/// Transforms only the angle axes of one time slice (length angle_points()).
void angle_to_values_inplace(Coeffs& c, const Grid& g);
void angle_to_coeffs_inplace(Coeffs& v, const Grid& g);

/// Copies the modes common to both grids; everything else is zero.
Coeffs resample(const Coeffs& c, const Grid& from, const Grid& to);
/// Angle-only resampling for a single time slice.
Coeffs resample_angles(const Coeffs& c, const Grid& from, const Grid& to);

Coeffs derive_angle(const Coeffs& c, const Grid& g, int j);
Coeffs derive_time(const Coeffs& c, const Grid& g);

/// Keeps modes of order <= K; the removed part goes to `rest` if given.
void truncate_order(Coeffs& c, const Grid& g, int K, Coeffs* rest = nullptr);
/// Keeps k = 0 modes only.
Coeffs angle_mean(const Coeffs& c, const Grid& g);
/// Weighted l1 norm; with `skip_angle_mean` the k = 0 modes are ignored.
double weighted_norm(const Coeffs& c, const Grid& g, double s, bool skip_angle_mean = false);
void symmetrize(Coeffs& c, const Grid& g);
double reality_defect(const Coeffs& c, const Grid& g);
void zero_nyquist(Coeffs& c, const Grid& g);

double evaluate(const Coeffs& c, const Grid& g, std::span<const double> theta, double t);

/// Solves omega_ext . d/d(theta,t) S = -R mode by mode: S = i R / (<k,w> + l) for modes
/// allowed by the order and zero-angle rules (zero elsewhere). Zero coefficients are
/// skipped, so the reported smallest divisor is over modes actually present.
struct DivisorReport {
  double min_divisor = 0.0;
  std::vector<int> k;
  int l = 0;
};
Coeffs solve_cohomological(const Coeffs& r, const Grid& g, std::span<const double> freq, int K,
                           bool include_zero_angle, DivisorReport* report = nullptr);

FourierField to_field(const Coeffs& c, const Grid& g, double s = 1.0, double tau = 0.0,
                      double drop_below = 0.0);
/// Modes outside the grid are ignored; returns false if any were dropped.
Coeffs from_field(const FourierField& f, const Grid& g, bool* complete = nullptr);

/// Re-expands a function known on a fine angle grid in new angles
/// phi = theta + shift(theta):
///   out(k) = mean_i w_i exp(-i <k, phi_i>) det(I + d shift/d theta)_i
/// `values` holds w at the fine angle points of one time slice, `shift` holds d
/// arrays of displacements, `jac_det` the Jacobian determinant. Output modes
/// live on `target` (angles only). Several integrands can share one map.
class Pullback {
 public:
  Pullback(const Grid& fine, const Grid& target);
  void set_map(const std::vector<const double*>& shift, const double* jac_det);
  /// Writes angle coefficients of one time slice (length target.angle_points()).
  /// The values must be real (imaginary parts zero); d = 2 relies on it.
  void apply(const complex* values, complex* out) const;

 private:
  Grid fine_;
  Grid target_;
  int kmax_;
  std::vector<complex> phase_;  // [dim][point][2 kmax + 1]
  std::vector<double> weight_;
};

}  // namespace kamforge::spectral
