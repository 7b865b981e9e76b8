#pragma once

#include <span>
#include <vector>

namespace kamforge {

/// Tensor Chebyshev nodes (first kind) on the cube |I - center|_inf <= radius.
class ActionBox {
 public:
  ActionBox() = default;
  ActionBox(std::vector<double> center, double radius, int nodes_per_dim);

  int dim() const { return static_cast<int>(center_.size()); }
  int nodes_per_dim() const { return n_; }
  int node_count() const;
  const std::vector<double>& center() const { return center_; }
  double radius() const { return radius_; }

  std::vector<double> node(int flat) const;
  /// Per-dimension node index of a flat index.
  std::vector<int> node_multi_index(int flat) const;
  /// Reference coordinate in [-1, 1] of node i along one axis.
  double reference_node(int i) const { return x_[i]; }

  /// Interpolation weights: f^{(orders)}(I) ~ sum_n w_n f(node_n).
  std::vector<double> weights(std::span<const double> I, std::span<const int> orders = {}) const;
  /// One-dimensional weights along an axis (value or p-th derivative at I_j).
  std::vector<double> axis_weights(double Ij, int axis, int p) const;
  /// Node-to-node derivative matrix along one axis (n x n, row = target node).
  std::vector<double> axis_derivative_matrix(int p) const;

  bool contains(std::span<const double> I, double slack = 0.0) const;

  /// Value weights by the barycentric formula; no allocation. `w` has
  /// node_count() entries. Needs dim() <= 3 and nodes_per_dim() <= 32.
  void fast_weights(const double* I, double* w) const;
  /// Same polynomial evaluated from nodal values.
  double interpolate(std::span<const double> values, std::span<const double> I) const;

 private:
  std::vector<double> center_;
  double radius_ = 0.0;
  int n_ = 0;
  std::vector<double> x_;     // reference nodes
  std::vector<double> coef_;  // values -> Chebyshev coefficients, n x n
  std::vector<double> bary_;  // barycentric weights of the nodes
};

}  // namespace kamforge
