#include "kamforge/node_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kamforge {

NodeField::NodeField(const spectral::Grid& g, const ActionBox& b)
    : grid(g), box(b), at(b.node_count(), spectral::Coeffs(g.size(), complex(0.0))) {
  if (g.d != b.dim()) throw std::invalid_argument("NodeField: grid and box dimensions differ");
}

spectral::Coeffs NodeField::combine(std::span<const double> w) const {
  spectral::Coeffs out(grid.size(), complex(0.0));
  for (int n = 0; n < node_count(); ++n) {
    if (w[n] == 0.0) continue;
    const auto& a = at[n];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[n] * a[i];
  }
  return out;
}

spectral::Coeffs NodeField::at_action(std::span<const double> I) const { return combine(box.weights(I)); }

double NodeField::evaluate(std::span<const double> theta, double t, std::span<const double> I) const {
  return spectral::evaluate(at_action(I), grid, theta, t);
}

NodeField NodeField::interpolate(const ActionBox& target) const {
  NodeField out(grid, target);
  for (int n = 0; n < target.node_count(); ++n) out.at[n] = combine(box.weights(target.node(n)));
  return out;
}

NodeField NodeField::derive_action(int j, int p) const {
  const int nd = box.nodes_per_dim();
  auto D = box.axis_derivative_matrix(p);
  NodeField out(grid, box);
  for (int f = 0; f < node_count(); ++f) {
    auto idx = box.node_multi_index(f);
    // Nodes along axis j through f share every other index.
    int stride = 1;
    for (int q = box.dim() - 1; q > j; --q) stride *= nd;
    int base = f - idx[j] * stride;
    auto& dst = out.at[f];
    for (int c = 0; c < nd; ++c) {
      double w = D[idx[j] * nd + c];
      if (w == 0.0) continue;
      const auto& src = at[base + c * stride];
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += w * src[i];
    }
  }
  return out;
}

NodeField NodeField::derive_angle(int j) const {
  NodeField out = *this;
  for (auto& a : out.at) a = spectral::derive_angle(a, grid, j);
  return out;
}

NodeField NodeField::derive_time() const {
  NodeField out = *this;
  for (auto& a : out.at) a = spectral::derive_time(a, grid);
  return out;
}

NodeField NodeField::angle_mean() const {
  NodeField out = *this;
  for (auto& a : out.at) a = spectral::angle_mean(a, grid);
  return out;
}

double NodeField::norm(double s, bool skip_angle_mean) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (skip_angle_mean && i < static_cast<std::size_t>(grid.n_time)) continue;
    double m = 0.0;
    for (const auto& a : at) m = std::max(m, std::abs(a[i]));
    if (m > 0.0) sum += m * std::exp(s * spectral::order(grid, i));
  }
  return sum;
}

double NodeField::reality_defect() const {
  double worst = 0.0;
  for (const auto& a : at) worst = std::max(worst, spectral::reality_defect(a, grid));
  return worst;
}

NodeField& NodeField::operator+=(const NodeField& o) {
  if (o.at.size() != at.size() || !(o.grid == grid)) throw std::invalid_argument("NodeField: shape mismatch");
  for (std::size_t n = 0; n < at.size(); ++n)
    for (std::size_t i = 0; i < at[n].size(); ++i) at[n][i] += o.at[n][i];
  return *this;
}

NodeField& NodeField::operator-=(const NodeField& o) {
  if (o.at.size() != at.size() || !(o.grid == grid)) throw std::invalid_argument("NodeField: shape mismatch");
  for (std::size_t n = 0; n < at.size(); ++n)
    for (std::size_t i = 0; i < at[n].size(); ++i) at[n][i] -= o.at[n][i];
  return *this;
}

NodeField& NodeField::operator*=(double a) {
  for (auto& v : at)
    for (auto& c : v) c *= a;
  return *this;
}

FourierField to_field(const NodeField& f, std::span<const double> I, double s) {
  return spectral::to_field(f.at_action(I), f.grid, s, f.box.radius());
}

}  // namespace kamforge
