#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace kamforge {

using complex = std::complex<double>;

/// Index of a Fourier mode e^{i(<k,theta> + l t)}.
struct ModeIndex {
  std::vector<int> k;
  int l = 0;

  int order() const;
  ModeIndex negated() const;
  bool is_zero() const;

  friend bool operator<(const ModeIndex& a, const ModeIndex& b);
  friend bool operator==(const ModeIndex& a, const ModeIndex& b) = default;
};

/// Real-valued truncated Fourier series on T^{d+1} (d angles plus time).
/// Coefficients are kept for both (k,l) and (-k,-l); every mutator keeps the
/// pair conjugate, so the represented function is real.
class FourierField {
 public:
  static constexpr int kNoCutoff = 1 << 20;

  explicit FourierField(int d = 0, double s = 1.0, double tau = 0.0, int cutoff = kNoCutoff);

  int dim() const { return d_; }
  double width() const { return s_; }
  double radius() const { return tau_; }
  int cutoff() const { return cutoff_; }
  void set_width(double s);
  void set_radius(double tau);

  /// Sets coeff(m) = c and coeff(-m) = conj(c). For the zero mode only Re c is kept.
  void assign(const ModeIndex& m, complex c);
  /// Adds c to coeff(m) and conj(c) to coeff(-m).
  void add(const ModeIndex& m, complex c);
  complex coeff(const ModeIndex& m) const;

  const std::map<ModeIndex, complex>& modes() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }
  bool empty() const { return coeffs_.empty(); }
  int max_order() const;
  /// Largest |k_j| (j < d) or |l| (j == d) over stored modes.
  int max_index(int j) const;

  double evaluate(std::span<const double> theta, double t) const;
  /// Largest |c(k,l) - conj c(-k,-l)| over stored modes.
  double reality_defect() const;
  /// Averages each pair towards conjugate symmetry; throws if the drift exceeds `tol`.
  void symmetrize(double tol = 1e-10);
  /// Removes coefficients with |c| <= tol.
  void prune(double tol = 0.0);

  FourierField& operator+=(const FourierField& o);
  FourierField& operator-=(const FourierField& o);
  FourierField& operator*=(double a);

 private:
  void set_raw(const ModeIndex& m, complex c);

  int d_;
  double s_;
  double tau_;
  int cutoff_;
  std::map<ModeIndex, complex> coeffs_;
};

FourierField operator+(FourierField a, const FourierField& b);
FourierField operator-(FourierField a, const FourierField& b);
FourierField operator*(double s, FourierField a);

/// Gamma_K: modes with |k|_1 + |l| <= K.
FourierField truncate(const FourierField& f, int K);
/// (1 - Gamma_K) f.
FourierField tail(const FourierField& f, int K);

/// Weighted coefficient bound sum |c| e^{s(|k|+|l|)}. Requires s <= f.width().
double analytic_norm(const FourierField& f, double s);

enum class Axis { angle, time, action };
struct Derivative {
  Axis axis = Axis::angle;
  int index = 0;
};
/// Spectral derivative. Plain fields carry no action slot, so Axis::action throws.
FourierField derive(const FourierField& f, Derivative which);

FourierField angle_average(const FourierField& f);
FourierField time_average(const FourierField& f);

/// Dealiased product. The result keeps orders up to min(2 max order, cap);
/// mass above the cap is reported through `dropped_mass`.
FourierField multiply(const FourierField& f, const FourierField& g, int cap = -1,
                      double* dropped_mass = nullptr);

/// JSON text {d, s, tau, cutoff, modes:[{k:[...], l, re, im}]} with 17 significant digits.
std::string to_json(const FourierField& f);
FourierField field_from_json(const std::string& text);

}  // namespace kamforge
