#pragma once

// Numerical checks shared by unit and acceptance tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace kamforge::testing {

using PhaseMap = std::function<std::vector<double>(std::span<const double>)>;

// max |J^T W J - W| with J from central differences of step h and W the
// standard form on (q_1..q_d, p_1..p_d).
inline double symplectic_defect(const PhaseMap& f, std::span<const double> z, double h) {
  const int n = static_cast<int>(z.size());
  const int d = n / 2;
  Eigen::MatrixXd J(n, n);
  std::vector<double> zp(z.begin(), z.end()), zm(z.begin(), z.end());
  for (int c = 0; c < n; ++c) {
    zp[c] = z[c] + h;
    zm[c] = z[c] - h;
    auto a = f(zp), b = f(zm);
    for (int r = 0; r < n; ++r) J(r, c) = (a[r] - b[r]) / (2.0 * h);
    zp[c] = zm[c] = z[c];
  }
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  W.topRightCorner(d, d) = Eigen::MatrixXd::Identity(d, d);
  W.bottomLeftCorner(d, d) = -Eigen::MatrixXd::Identity(d, d);
  return (J.transpose() * W * J - W).cwiseAbs().maxCoeff();
}

// Collects H_new(x) - H_old(Psi(x)) at sample points; the spread after removing
// the mean is the conjugation error modulo an additive constant.
class ConjugationError {
 public:
  void add(double h_new, double h_old) {
    diff_.push_back(h_new - h_old);
    scale_ = std::max(scale_, std::abs(h_new));
  }
  double absolute() const {
    if (diff_.empty()) return 0.0;
    double mean = 0.0;
    for (double x : diff_) mean += x;
    mean /= static_cast<double>(diff_.size());
    double e = 0.0;
    for (double x : diff_) e = std::max(e, std::abs(x - mean));
    return e;
  }
  double relative() const { return scale_ > 0.0 ? absolute() / scale_ : absolute(); }

 private:
  std::vector<double> diff_;
  double scale_ = 0.0;
};

}  // namespace kamforge::testing
