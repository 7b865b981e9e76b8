#include "kamforge/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include <Eigen/Dense>

namespace kamforge::spectral {

std::size_t Grid::angle_points() const {
  std::size_t n = 1;
  for (int j = 0; j < d; ++j) n *= static_cast<std::size_t>(n_angle);
  return n;
}

std::vector<int> Grid::shape() const {
  std::vector<int> s(d, n_angle);
  s.push_back(n_time);
  return s;
}

Grid Grid::refined(int factor_angle, int factor_time) const {
  return Grid{d, n_angle * factor_angle, n_time * factor_time};
}

int decode(const Grid& g, std::size_t idx, int* k) {
  int l = wavenumber(static_cast<int>(idx % g.n_time), g.n_time);
  idx /= g.n_time;
  for (int j = g.d - 1; j >= 0; --j) {
    k[j] = wavenumber(static_cast<int>(idx % g.n_angle), g.n_angle);
    idx /= g.n_angle;
  }
  return l;
}

bool encode(const Grid& g, std::span<const int> k, int l, std::size_t* idx) {
  if (std::abs(l) > g.lmax()) return false;
  std::size_t i = 0;
  for (int j = 0; j < g.d; ++j) {
    if (std::abs(k[j]) > g.kmax()) return false;
    i = i * g.n_angle + slot(k[j], g.n_angle);
  }
  *idx = i * g.n_time + slot(l, g.n_time);
  return true;
}

bool is_nyquist(const Grid& g, std::size_t idx) {
  if (g.n_time % 2 == 0 && static_cast<int>(idx % g.n_time) == g.n_time / 2) return true;
  idx /= g.n_time;
  for (int j = 0; j < g.d; ++j) {
    if (g.n_angle % 2 == 0 && static_cast<int>(idx % g.n_angle) == g.n_angle / 2) return true;
    idx /= g.n_angle;
  }
  return false;
}

int order(const Grid& g, std::size_t idx) {
  int k[16];
  int l = decode(g, idx, k);
  int o = std::abs(l);
  for (int j = 0; j < g.d; ++j) o += std::abs(k[j]);
  return o;
}

namespace {

// FFTW planning is not thread safe; execution with the new-array API is.
struct PlanKey {
  std::vector<int> shape;
  std::vector<int> axes;
  int sign;
  bool operator<(const PlanKey& o) const { return std::tie(shape, axes, sign) < std::tie(o.shape, o.axes, o.sign); }
};

std::mutex plan_mutex;
std::map<PlanKey, fftw_plan>& plan_cache() {
  static std::map<PlanKey, fftw_plan> cache;
  return cache;
}

fftw_plan get_plan(const std::vector<int>& shape, const std::vector<int>& axes, int sign) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  PlanKey key{shape, axes, sign};
  auto& cache = plan_cache();
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const int r = static_cast<int>(shape.size());
  std::vector<int> stride(r, 1);
  for (int i = r - 2; i >= 0; --i) stride[i] = stride[i + 1] * shape[i + 1];
  std::vector<fftw_iodim> dims, many;
  for (int i = 0; i < r; ++i) {
    fftw_iodim io{shape[i], stride[i], stride[i]};
    if (std::find(axes.begin(), axes.end(), i) != axes.end())
      dims.push_back(io);
    else
      many.push_back(io);
  }
  std::size_t total = 1;
  for (int n : shape) total *= n;
  auto* buf = fftw_alloc_complex(total);
  // ESTIMATE keeps the algorithm choice independent of timing, so reruns are
  // bit-identical.
  fftw_plan p = fftw_plan_guru_dft(static_cast<int>(dims.size()), dims.data(), static_cast<int>(many.size()),
                                   many.data(), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  if (!p) throw std::runtime_error("fftw planning failed");
  cache.emplace(key, p);
  return p;
}

void run(Coeffs& a, const std::vector<int>& shape, const std::vector<int>& axes, int sign) {
  if (axes.empty()) return;
  fftw_plan p = get_plan(shape, axes, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(p, ptr, ptr);
}

std::vector<int> angle_axes(const Grid& g) {
  std::vector<int> ax(g.d);
  for (int j = 0; j < g.d; ++j) ax[j] = j;
  return ax;
}

void scale(Coeffs& a, double s) {
  for (auto& v : a) v *= s;
}

}  // namespace

void to_values_inplace(Coeffs& c, const Grid& g) {
  auto ax = angle_axes(g);
  ax.push_back(g.d);
  run(c, g.shape(), ax, FFTW_BACKWARD);
}

void to_coeffs_inplace(Coeffs& v, const Grid& g) {
  auto ax = angle_axes(g);
  ax.push_back(g.d);
  run(v, g.shape(), ax, FFTW_FORWARD);
  scale(v, 1.0 / static_cast<double>(g.size()));
  zero_nyquist(v, g);
}

Coeffs to_values(const Coeffs& c, const Grid& g) {
  Coeffs v = c;
  to_values_inplace(v, g);
  return v;
}

Coeffs to_coeffs(const Coeffs& v, const Grid& g) {
  Coeffs c = v;
  to_coeffs_inplace(c, g);
  return c;
}

void time_to_values_inplace(Coeffs& c, const Grid& g) { run(c, g.shape(), {g.d}, FFTW_BACKWARD); }

void time_to_coeffs_inplace(Coeffs& v, const Grid& g) {
  run(v, g.shape(), {g.d}, FFTW_FORWARD);
  scale(v, 1.0 / g.n_time);
  if (g.n_time % 2 == 0)
    for (std::size_t i = g.n_time / 2; i < v.size(); i += g.n_time) v[i] = 0.0;
}

void angle_to_values_inplace(Coeffs& c, const Grid& g) {
  if (g.d == 0) return;
  run(c, std::vector<int>(g.d, g.n_angle), angle_axes(g), FFTW_BACKWARD);
}

void angle_to_coeffs_inplace(Coeffs& v, const Grid& g) {
  if (g.d == 0) return;
  run(v, std::vector<int>(g.d, g.n_angle), angle_axes(g), FFTW_FORWARD);
  scale(v, 1.0 / static_cast<double>(g.angle_points()));
  Grid slice{g.d, g.n_angle, 1};
  for (std::size_t i = 0; i < v.size(); ++i)
    if (is_nyquist(slice, i)) v[i] = 0.0;
}

Coeffs resample(const Coeffs& c, const Grid& from, const Grid& to) {
  if (from.d != to.d) throw std::invalid_argument("resample: dimension mismatch");
  if (from == to) return c;
  Coeffs out(to.size(), complex(0.0, 0.0));
  int k[16];
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == complex(0.0, 0.0) || is_nyquist(from, i)) continue;
    int l = decode(from, i, k);
    std::size_t j;
    if (encode(to, std::span<const int>(k, from.d), l, &j)) out[j] = c[i];
  }
  return out;
}

Coeffs resample_angles(const Coeffs& c, const Grid& from, const Grid& to) {
  Grid a{from.d, from.n_angle, 1}, b{to.d, to.n_angle, 1};
  return resample(c, a, b);
}

Coeffs derive_angle(const Coeffs& c, const Grid& g, int j) {
  Coeffs out(c.size());
  int k[16];
  for (std::size_t i = 0; i < c.size(); ++i) {
    decode(g, i, k);
    out[i] = is_nyquist(g, i) ? complex(0.0) : complex(0.0, k[j]) * c[i];
  }
  return out;
}

Coeffs derive_time(const Coeffs& c, const Grid& g) {
  Coeffs out(c.size());
  int k[16];
  for (std::size_t i = 0; i < c.size(); ++i) {
    int l = decode(g, i, k);
    out[i] = is_nyquist(g, i) ? complex(0.0) : complex(0.0, l) * c[i];
  }
  return out;
}

void truncate_order(Coeffs& c, const Grid& g, int K, Coeffs* rest) {
  if (rest) rest->assign(c.size(), complex(0.0, 0.0));
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (order(g, i) > K || is_nyquist(g, i)) {
      if (rest) (*rest)[i] = c[i];
      c[i] = 0.0;
    }
  }
}

Coeffs angle_mean(const Coeffs& c, const Grid& g) {
  Coeffs out(c.size(), complex(0.0, 0.0));
  for (int i = 0; i < g.n_time; ++i) out[i] = c[i];  // k = 0 block is the first time row
  return out;
}

double weighted_norm(const Coeffs& c, const Grid& g, double s, bool skip_angle_mean) {
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (skip_angle_mean && i < static_cast<std::size_t>(g.n_time)) continue;
    if (c[i] == complex(0.0, 0.0)) continue;
    sum += std::abs(c[i]) * std::exp(s * order(g, i));
  }
  return sum;
}

namespace {

std::size_t mirror(const Grid& g, std::size_t idx) {
  int k[16];
  int l = decode(g, idx, k);
  for (int j = 0; j < g.d; ++j) k[j] = -k[j];
  std::size_t out = 0;
  for (int j = 0; j < g.d; ++j) out = out * g.n_angle + slot(k[j], g.n_angle);
  return out * g.n_time + slot(-l, g.n_time);
}

}  // namespace

void symmetrize(Coeffs& c, const Grid& g) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::size_t j = mirror(g, i);
    if (j < i) continue;
    complex v = 0.5 * (c[i] + std::conj(c[j]));
    c[i] = v;
    c[j] = std::conj(v);
  }
  zero_nyquist(c, g);
}

double reality_defect(const Coeffs& c, const Grid& g) {
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) worst = std::max(worst, std::abs(c[i] - std::conj(c[mirror(g, i)])));
  return worst;
}

void zero_nyquist(Coeffs& c, const Grid& g) {
  if (g.n_angle % 2 != 0 && g.n_time % 2 != 0) return;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (is_nyquist(g, i)) c[i] = 0.0;
}

double evaluate(const Coeffs& c, const Grid& g, std::span<const double> theta, double t) {
  // Separable synthesis: phases per axis, then a nested sum.
  std::vector<std::vector<complex>> ph(g.d + 1);
  for (int j = 0; j <= g.d; ++j) {
    int n = j < g.d ? g.n_angle : g.n_time;
    double x = j < g.d ? theta[j] : t;
    ph[j].resize(n);
    for (int i = 0; i < n; ++i) {
      int w = wavenumber(i, n);
      ph[j][i] = (n % 2 == 0 && i == n / 2) ? complex(0.0) : std::polar(1.0, w * x);
    }
  }
  // Contract the time axis first, then angles from the last one inward.
  std::size_t outer = g.angle_points();
  std::vector<complex> acc(outer);
  for (std::size_t a = 0; a < outer; ++a) {
    complex s(0.0);
    const complex* row = c.data() + a * g.n_time;
    for (int i = 0; i < g.n_time; ++i) s += row[i] * ph[g.d][i];
    acc[a] = s;
  }
  for (int j = g.d - 1; j >= 0; --j) {
    std::size_t m = acc.size() / g.n_angle;
    std::vector<complex> next(m);
    for (std::size_t a = 0; a < m; ++a) {
      complex s(0.0);
      for (int i = 0; i < g.n_angle; ++i) s += acc[a * g.n_angle + i] * ph[j][i];
      next[a] = s;
    }
    acc.swap(next);
  }
  return acc[0].real();
}

Coeffs solve_cohomological(const Coeffs& r, const Grid& g, std::span<const double> freq, int K,
                           bool include_zero_angle, DivisorReport* report) {
  Coeffs s(r.size(), complex(0.0, 0.0));
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_k(g.d, 0);
  int best_l = 0;
  int k[16];
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (is_nyquist(g, i) || r[i] == complex(0.0)) continue;
    int l = decode(g, i, k);
    bool zero_k = std::all_of(k, k + g.d, [](int v) { return v == 0; });
    if (zero_k && (!include_zero_angle || l == 0)) continue;
    int o = std::abs(l);
    for (int j = 0; j < g.d; ++j) o += std::abs(k[j]);
    if (o > K) continue;
    double lam = l;
    for (int j = 0; j < g.d; ++j) lam += k[j] * freq[j];
    if (std::abs(lam) < best) {
      best = std::abs(lam);
      best_k.assign(k, k + g.d);
      best_l = l;
    }
    s[i] = complex(0.0, 1.0) * r[i] / lam;
  }
  if (report) *report = DivisorReport{best, best_k, best_l};
  return s;
}

FourierField to_field(const Coeffs& c, const Grid& g, double s, double tau, double drop_below) {
  FourierField f(g.d, s, tau);
  int k[16];
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (std::abs(c[i]) <= drop_below || is_nyquist(g, i)) continue;
    int l = decode(g, i, k);
    ModeIndex m{std::vector<int>(k, k + g.d), l};
    // Write both members of the pair from the lexicographically smaller one.
    if (m.negated() < m && std::abs(c[mirror(g, i)]) > drop_below) continue;
    f.assign(m, c[i]);
  }
  return f;
}

Coeffs from_field(const FourierField& f, const Grid& g, bool* complete) {
  if (f.dim() != g.d) throw std::invalid_argument("from_field: dimension mismatch");
  Coeffs c(g.size(), complex(0.0, 0.0));
  bool all = true;
  for (const auto& [m, v] : f.modes()) {
    std::size_t i;
    if (encode(g, m.k, m.l, &i))
      c[i] = v;
    else
      all = false;
  }
  if (complete) *complete = all;
  return c;
}

Pullback::Pullback(const Grid& fine, const Grid& target) : fine_(fine), target_(target), kmax_(target.kmax()) {
  if (fine.d != target.d) throw std::invalid_argument("Pullback: dimension mismatch");
  if (fine.d < 1 || fine.d > 3) throw std::invalid_argument("Pullback: supports 1 to 3 angles");
}

void Pullback::set_map(const std::vector<const double*>& shift, const double* jac_det) {
  const int d = fine_.d;
  const std::size_t np = fine_.angle_points();
  const int nk = 2 * kmax_ + 1;
  phase_.assign(static_cast<std::size_t>(d) * np * nk, complex(0.0));
  weight_.assign(jac_det, jac_det + np);
  const double h = 2.0 * std::numbers::pi / fine_.n_angle;
  for (std::size_t p = 0; p < np; ++p) {
    std::size_t rem = p;
    int idx[3];
    for (int j = d - 1; j >= 0; --j) {
      idx[j] = static_cast<int>(rem % fine_.n_angle);
      rem /= fine_.n_angle;
    }
    for (int j = 0; j < d; ++j) {
      double phi = idx[j] * h + shift[j][p];
      complex z = std::polar(1.0, -phi);
      complex* row = phase_.data() + (static_cast<std::size_t>(j) * np + p) * nk;
      // row[kmax + k] = exp(-i k phi); built by repeated multiplication from both ends.
      row[kmax_] = 1.0;
      complex zp = 1.0;
      for (int k = 1; k <= kmax_; ++k) {
        zp *= z;
        row[kmax_ + k] = zp;
        row[kmax_ - k] = std::conj(zp);
      }
    }
  }
}

void Pullback::apply(const complex* values, complex* out) const {
  const int d = fine_.d;
  const std::size_t np = fine_.angle_points();
  const int nk = 2 * kmax_ + 1;
  const double inv = 1.0 / static_cast<double>(np);
  std::fill(out, out + target_.angle_points(), complex(0.0));
  using Mat = Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  if (d == 1) {
    for (int k = 0; k < nk; ++k) {
      complex s(0.0);
      for (std::size_t p = 0; p < np; ++p) s += values[p] * weight_[p] * phase_[p * nk + k];
      out[slot(k - kmax_, target_.n_angle)] = s * inv;
    }
    return;
  }
  if (d == 2) {
    // Real integrand: only k1 >= 0 is computed, the rest is the conjugate mirror.
    const int nh = kmax_ + 1;
    Eigen::Map<const Mat> e1(phase_.data(), np, nk);
    Eigen::Map<const Mat> e2(phase_.data() + np * nk, np, nk);
    Mat a(np, nh);
    for (std::size_t p = 0; p < np; ++p) {
      complex w = values[p] * weight_[p] * inv;
      for (int k = 0; k < nh; ++k) a(p, k) = w * e1(p, kmax_ + k);
    }
    Mat r = a.transpose() * e2;
    const int n = target_.n_angle;
    for (int k1 = 0; k1 < nh; ++k1)
      for (int k2 = -kmax_; k2 <= kmax_; ++k2) {
        complex v = r(k1, kmax_ + k2);
        out[static_cast<std::size_t>(slot(k1, n)) * n + slot(k2, n)] = v;
        if (k1 > 0) out[static_cast<std::size_t>(slot(-k1, n)) * n + slot(-k2, n)] = std::conj(v);
      }
    return;
  }
  // d == 3: contract the last two axes per point, plain loops.
  const complex* e1 = phase_.data();
  const complex* e2 = e1 + np * nk;
  const complex* e3 = e2 + np * nk;
  for (std::size_t p = 0; p < np; ++p) {
    complex w = values[p] * weight_[p] * inv;
    for (int a = 0; a < nk; ++a) {
      complex wa = w * e1[p * nk + a];
      std::size_t ia = slot(a - kmax_, target_.n_angle);
      for (int b = 0; b < nk; ++b) {
        complex wb = wa * e2[p * nk + b];
        std::size_t ib = ia * target_.n_angle + slot(b - kmax_, target_.n_angle);
        for (int c = 0; c < nk; ++c)
          out[ib * target_.n_angle + slot(c - kmax_, target_.n_angle)] += wb * e3[p * nk + c];
      }
    }
  }
}

}  // namespace kamforge::spectral
