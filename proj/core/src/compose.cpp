#include "compose.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kamforge::detail {

std::vector<double> fine_values(const spectral::Coeffs& c, const spectral::Grid& work, const spectral::Grid& fine) {
  auto r = spectral::resample(c, work, fine);
  spectral::to_values_inplace(r, fine);
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = r[i].real();
  return out;
}

std::vector<double> fine_values(const NodeField& f, const spectral::Grid& fine) {
  const int nn = f.node_count();
  std::vector<double> out(fine.size() * nn);
  for (int n = 0; n < nn; ++n) {
    auto v = fine_values(f.at[n], f.grid, fine);
    for (std::size_t p = 0; p < v.size(); ++p) out[p * nn + n] = v[p];
  }
  return out;
}

std::vector<double> fine_time_values(const NodeField& f, int n_time_fine) {
  const int nn = f.node_count();
  std::vector<double> out(static_cast<std::size_t>(n_time_fine) * nn);
  spectral::Grid from{0, 1, f.grid.n_time}, to{0, 1, n_time_fine};
  for (int n = 0; n < nn; ++n) {
    spectral::Coeffs row(f.at[n].begin(), f.at[n].begin() + f.grid.n_time);
    auto r = spectral::resample(row, from, to);
    spectral::to_values_inplace(r, to);
    for (int it = 0; it < n_time_fine; ++it) out[it * nn + n] = r[it].real();
  }
  return out;
}

SlicePullback::SlicePullback(const spectral::Grid& work, const spectral::Grid& fine) : work_(work), fine_(fine) {
  if (work.d != fine.d) throw std::invalid_argument("SlicePullback: dimension mismatch");
}

void SlicePullback::run(const std::vector<const double*>& shift, const double* det,
                        const std::vector<const double*>& integrands,
                        std::vector<spectral::Coeffs*> outputs) const {
  const int d = fine_.d;
  const int nt = fine_.n_time;
  const std::size_t np = fine_.angle_points();
  const spectral::Grid target{d, work_.n_angle, 1};
  const spectral::Grid mixed{d, work_.n_angle, nt};  // angle coefficients x time values
  const std::size_t na = target.angle_points();
  spectral::Pullback pb(fine_, target);
  std::vector<std::vector<double>> sh(d, std::vector<double>(np));
  std::vector<double> dt(np);
  std::vector<complex> vals(np), out(na);
  std::vector<spectral::Coeffs> acc(integrands.size(), spectral::Coeffs(mixed.size()));
  std::vector<const double*> shp(d);
  for (int it = 0; it < nt; ++it) {
    for (std::size_t p = 0; p < np; ++p) {
      for (int j = 0; j < d; ++j) sh[j][p] = shift[j][p * nt + it];
      dt[p] = det[p * nt + it];
    }
    for (int j = 0; j < d; ++j) shp[j] = sh[j].data();
    pb.set_map(shp, dt.data());
    for (std::size_t q = 0; q < integrands.size(); ++q) {
      for (std::size_t p = 0; p < np; ++p) vals[p] = integrands[q][p * nt + it];
      pb.apply(vals.data(), out.data());
      for (std::size_t a = 0; a < na; ++a) acc[q][a * nt + it] = out[a];
    }
  }
  for (std::size_t q = 0; q < integrands.size(); ++q) {
    spectral::time_to_coeffs_inplace(acc[q], mixed);
    *outputs[q] = spectral::resample(acc[q], mixed, work_);
    spectral::symmetrize(*outputs[q], work_);
  }
}

double max_operator_norm(const std::vector<const double*>& jac, int d, std::size_t points) {
  double worst = 0.0;
  Eigen::MatrixXd M(d, d);
  for (std::size_t p = 0; p < points; ++p) {
    double fro = 0.0;
    for (int i = 0; i < d * d; ++i) fro += jac[i][p] * jac[i][p];
    fro = std::sqrt(fro);
    if (fro <= worst) continue;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) M(i, j) = jac[i * d + j][p];
    double op = d == 1 ? std::abs(M(0, 0)) : Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
    worst = std::max(worst, op);
  }
  return worst;
}

std::vector<double> jacobian_det(const std::vector<const double*>& jac, int d, std::size_t points) {
  std::vector<double> out(points);
  for (std::size_t p = 0; p < points; ++p) {
    if (d == 1) {
      out[p] = 1.0 + jac[0][p];
    } else if (d == 2) {
      out[p] = (1.0 + jac[0][p]) * (1.0 + jac[3][p]) - jac[1][p] * jac[2][p];
    } else {
      Eigen::MatrixXd M = Eigen::MatrixXd::Identity(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) M(i, j) += jac[i * d + j][p];
      out[p] = M.determinant();
    }
  }
  return out;
}

}  // namespace kamforge::detail
