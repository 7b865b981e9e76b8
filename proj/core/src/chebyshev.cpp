#include "kamforge/chebyshev.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kamforge {

ActionBox::ActionBox(std::vector<double> center, double radius, int nodes_per_dim)
    : center_(std::move(center)), radius_(radius), n_(nodes_per_dim) {
  if (!(radius > 0)) throw std::invalid_argument("ActionBox: radius must be positive");
  if (n_ < 1) throw std::invalid_argument("ActionBox: need at least one node");
  x_.resize(n_);
  for (int i = 0; i < n_; ++i) x_[i] = std::cos((2 * i + 1) * std::numbers::pi / (2.0 * n_));
  // c_m = (2 - delta_m0)/n sum_i f_i T_m(x_i)
  coef_.resize(static_cast<std::size_t>(n_) * n_);
  for (int m = 0; m < n_; ++m)
    for (int i = 0; i < n_; ++i)
      coef_[m * n_ + i] = (m == 0 ? 1.0 : 2.0) / n_ * std::cos(m * (2 * i + 1) * std::numbers::pi / (2.0 * n_));
  bary_.resize(n_);
  for (int i = 0; i < n_; ++i) bary_[i] = (i % 2 ? -1.0 : 1.0) * std::sin((2 * i + 1) * std::numbers::pi / (2.0 * n_));
}

int ActionBox::node_count() const {
  int c = 1;
  for (int j = 0; j < dim(); ++j) c *= n_;
  return c;
}

std::vector<int> ActionBox::node_multi_index(int flat) const {
  std::vector<int> idx(dim());
  for (int j = dim() - 1; j >= 0; --j) {
    idx[j] = flat % n_;
    flat /= n_;
  }
  return idx;
}

std::vector<double> ActionBox::node(int flat) const {
  auto idx = node_multi_index(flat);
  std::vector<double> p(dim());
  for (int j = 0; j < dim(); ++j) p[j] = center_[j] + radius_ * x_[idx[j]];
  return p;
}

std::vector<double> ActionBox::axis_weights(double Ij, int axis, int p) const {
  double xi = (Ij - center_[axis]) / radius_;
  // T_m^{(q)}(xi) for q = 0..p by the differentiated three-term recurrence.
  std::vector<std::vector<double>> T(p + 1, std::vector<double>(n_, 0.0));
  for (int q = 0; q <= p; ++q) {
    for (int m = 0; m < n_; ++m) {
      double v;
      if (m == 0)
        v = q == 0 ? 1.0 : 0.0;
      else if (m == 1)
        v = q == 0 ? xi : (q == 1 ? 1.0 : 0.0);
      else
        v = 2.0 * xi * T[q][m - 1] + (q > 0 ? 2.0 * q * T[q - 1][m - 1] : 0.0) - T[q][m - 2];
      T[q][m] = v;
    }
  }
  double scale = std::pow(radius_, -p);
  std::vector<double> w(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int m = 0; m < n_; ++m) s += T[p][m] * coef_[m * n_ + i];
    w[i] = s * scale;
  }
  return w;
}

std::vector<double> ActionBox::weights(std::span<const double> I, std::span<const int> orders) const {
  const int d = dim();
  std::vector<std::vector<double>> rows(d);
  for (int j = 0; j < d; ++j) rows[j] = axis_weights(I[j], j, orders.empty() ? 0 : orders[j]);
  std::vector<double> w(node_count());
  for (int f = 0; f < node_count(); ++f) {
    int rem = f;
    double v = 1.0;
    for (int j = d - 1; j >= 0; --j) {
      v *= rows[j][rem % n_];
      rem /= n_;
    }
    w[f] = v;
  }
  return w;
}

std::vector<double> ActionBox::axis_derivative_matrix(int p) const {
  std::vector<double> D(static_cast<std::size_t>(n_) * n_);
  for (int r = 0; r < n_; ++r) {
    auto w = axis_weights(center_.empty() ? 0.0 : center_[0] + radius_ * x_[r], 0, p);
    for (int c = 0; c < n_; ++c) D[r * n_ + c] = w[c];
  }
  return D;
}

void ActionBox::fast_weights(const double* I, double* w) const {
  const int d = dim();
  if (d > 3 || n_ > 32) throw std::invalid_argument("fast_weights: box too large");
  double ax[3][32];
  for (int j = 0; j < d; ++j) {
    double xi = (I[j] - center_[j]) / radius_;
    int hit = -1;
    double sum = 0.0;
    for (int i = 0; i < n_; ++i) {
      double diff = xi - x_[i];
      if (diff == 0.0) {
        hit = i;
        break;
      }
      ax[j][i] = bary_[i] / diff;
      sum += ax[j][i];
    }
    if (hit >= 0) {
      for (int i = 0; i < n_; ++i) ax[j][i] = i == hit ? 1.0 : 0.0;
    } else {
      for (int i = 0; i < n_; ++i) ax[j][i] /= sum;
    }
  }
  const int total = node_count();
  for (int f = 0; f < total; ++f) {
    int rem = f;
    double v = 1.0;
    for (int j = d - 1; j >= 0; --j) {
      v *= ax[j][rem % n_];
      rem /= n_;
    }
    w[f] = v;
  }
}

double ActionBox::interpolate(std::span<const double> values, std::span<const double> I) const {
  std::vector<double> w(node_count());
  fast_weights(I.data(), w.data());
  double s = 0.0;
  for (int f = 0; f < node_count(); ++f) s += w[f] * values[f];
  return s;
}

bool ActionBox::contains(std::span<const double> I, double slack) const {
  for (int j = 0; j < dim(); ++j)
    if (std::abs(I[j] - center_[j]) > radius_ * (1.0 + slack)) return false;
  return true;
}

}  // namespace kamforge
