#include "kamforge/hamiltonian.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kamforge {

double binomial_tail(double p, double y, int order) {
  if (std::abs(y) < 0.25) {
    double term = 1.0, sum = 0.0;
    for (int k = 0; k < 400; ++k) {
      if (k >= order) {
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      }
      term *= (p - k) / (k + 1.0) * y;
      if (term == 0.0) break;
    }
    return sum;
  }
  double v = std::pow(1.0 + y, p);
  double term = 1.0;
  for (int k = 0; k < order; ++k) {
    v -= term;
    term *= (p - k) / (k + 1.0) * y;
  }
  return v;
}

IntegrableHamiltonian IntegrableHamiltonian::power_law(int d, double coef, double p) {
  if (d < 1) throw std::invalid_argument("power_law: d must be >= 1");
  IntegrableHamiltonian h;
  h.d_ = d;
  h.coef_ = coef;
  h.p_ = p;
  return h;
}

IntegrableHamiltonian IntegrableHamiltonian::quadratic(std::vector<double> lin, std::vector<double> M) {
  IntegrableHamiltonian h;
  h.d_ = static_cast<int>(lin.size());
  if (M.size() != lin.size() * lin.size()) throw std::invalid_argument("quadratic: M must be d x d");
  h.lin_ = std::move(lin);
  h.M_ = std::move(M);
  return h;
}

namespace {
void need_positive(std::span<const double> J, double coef) {
  if (coef == 0.0) return;
  for (double v : J)
    if (!(v > 0)) throw std::domain_error("IntegrableHamiltonian: power part needs positive actions");
}
}  // namespace

double IntegrableHamiltonian::value(std::span<const double> J) const {
  need_positive(J, coef_);
  double v = 0.0;
  for (int i = 0; i < d_; ++i) {
    if (coef_ != 0.0) v += coef_ * std::pow(J[i], p_);
    if (!lin_.empty()) {
      v += lin_[i] * J[i];
      for (int j = 0; j < d_; ++j) v += 0.5 * M_[i * d_ + j] * J[i] * J[j];
    }
  }
  return v;
}

std::vector<double> IntegrableHamiltonian::gradient(std::span<const double> J) const {
  need_positive(J, coef_);
  std::vector<double> g(d_, 0.0);
  for (int i = 0; i < d_; ++i) {
    if (coef_ != 0.0) g[i] += coef_ * p_ * std::pow(J[i], p_ - 1.0);
    if (!lin_.empty()) {
      g[i] += lin_[i];
      for (int j = 0; j < d_; ++j) g[i] += 0.5 * (M_[i * d_ + j] + M_[j * d_ + i]) * J[j];
    }
  }
  return g;
}

std::vector<double> IntegrableHamiltonian::hessian(std::span<const double> J) const {
  need_positive(J, coef_);
  std::vector<double> h(d_ * d_, 0.0);
  for (int i = 0; i < d_; ++i) {
    if (coef_ != 0.0) h[i * d_ + i] += coef_ * p_ * (p_ - 1.0) * std::pow(J[i], p_ - 2.0);
    if (!lin_.empty())
      for (int j = 0; j < d_; ++j) h[i * d_ + j] += 0.5 * (M_[i * d_ + j] + M_[j * d_ + i]);
  }
  return h;
}

std::vector<double> IntegrableHamiltonian::third(std::span<const double> J) const {
  need_positive(J, coef_);
  std::vector<double> t(d_ * d_ * d_, 0.0);
  if (coef_ != 0.0)
    for (int i = 0; i < d_; ++i)
      t[(i * d_ + i) * d_ + i] = coef_ * p_ * (p_ - 1.0) * (p_ - 2.0) * std::pow(J[i], p_ - 3.0);
  return t;
}

double IntegrableHamiltonian::remainder(std::span<const double> J, std::span<const double> x, int order) const {
  if (order < 1 || order > 3) throw std::invalid_argument("remainder: order must be 1, 2 or 3");
  need_positive(J, coef_);
  double v = 0.0;
  if (coef_ != 0.0)
    for (int i = 0; i < d_; ++i) v += coef_ * std::pow(J[i], p_) * binomial_tail(p_, x[i] / J[i], order);
  if (!lin_.empty() && order <= 2) {
    for (int i = 0; i < d_; ++i) {
      if (order == 1) {
        v += lin_[i] * x[i];
        for (int j = 0; j < d_; ++j) v += 0.5 * M_[i * d_ + j] * (J[i] * x[j] + x[i] * J[j] + x[i] * x[j]);
      } else {
        for (int j = 0; j < d_; ++j) v += 0.5 * M_[i * d_ + j] * x[i] * x[j];
      }
    }
  }
  return v;
}

double NormalFormParams::s(int j) const { return s0 * std::ldexp(1.0, -j); }
double NormalFormParams::tau(int j) const { return tau0 * std::ldexp(1.0, -j); }

int NormalFormParams::K(int j, double eps, int cap) const {
  double k = std::ceil(tail_factor * std::log(1.0 / eps) / s(j));
  return static_cast<int>(std::min<double>(k, cap));
}

double NormalFormParams::theory_A(int d, double a, double b) { return 200.0 * d * (a + b); }

int NormalFormParams::theory_m0(int d, double a, double b) {
  return 2 + static_cast<int>(std::floor((b + theory_A(d, a, b)) / (a - b)));
}

double HamiltonianSpec::value(std::span<const double> phi, double t, std::span<const double> J) const {
  return std::pow(eps, -a) * H0.value(J) + std::pow(eps, -b) * R.evaluate(phi, t, J);
}

std::vector<double> HamiltonianSpec::frequency(std::span<const double> J) const {
  auto g = H0.gradient(J);
  for (double& v : g) v *= std::pow(eps, -a);
  return g;
}

double HamiltonianSpec::min_hessian_det(std::span<const double> lo, std::span<const double> hi, int n) const {
  double worst = std::numeric_limits<double>::infinity();
  std::vector<int> idx(d, 0);
  std::vector<double> J(d);
  for (;;) {
    for (int j = 0; j < d; ++j) J[j] = lo[j] + (hi[j] - lo[j]) * (idx[j] + 0.5) / n;
    auto h = H0.hessian(J);
    Eigen::Map<Eigen::MatrixXd> M(h.data(), d, d);
    worst = std::min(worst, std::abs(M.determinant()));
    int j = d - 1;
    while (j >= 0 && ++idx[j] == n) idx[j--] = 0;
    if (j < 0) break;
  }
  return worst;
}

void HamiltonianSpec::validate() const {
  if (d < 1) throw std::invalid_argument("HamiltonianSpec: d must be >= 1");
  if (!(a > b) || b < 0) throw std::invalid_argument("HamiltonianSpec: need a > b >= 0");
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("HamiltonianSpec: eps must lie in (0, 1)");
  if (H0.dim() != d || static_cast<int>(I0.size()) != d || R.grid.d != d)
    throw std::invalid_argument("HamiltonianSpec: dimension mismatch");
  std::vector<double> lo(d), hi(d);
  for (int j = 0; j < d; ++j) {
    lo[j] = R.box.center()[j] - R.box.radius();
    hi[j] = R.box.center()[j] + R.box.radius();
  }
  if (!(min_hessian_det(lo, hi, 4) > 0)) throw std::invalid_argument("HamiltonianSpec: H0 degenerate on the box");
}

}  // namespace kamforge
