#include "kamforge/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "kamforge/spectral.hpp"

namespace kamforge {

int ModeIndex::order() const {
  int o = std::abs(l);
  for (int v : k) o += std::abs(v);
  return o;
}

ModeIndex ModeIndex::negated() const {
  ModeIndex m{k, -l};
  for (int& v : m.k) v = -v;
  return m;
}

bool ModeIndex::is_zero() const {
  return l == 0 && std::all_of(k.begin(), k.end(), [](int v) { return v == 0; });
}

bool operator<(const ModeIndex& a, const ModeIndex& b) {
  if (a.k != b.k) return a.k < b.k;
  return a.l < b.l;
}

FourierField::FourierField(int d, double s, double tau, int cutoff)
    : d_(d), s_(s), tau_(tau), cutoff_(cutoff) {
  if (d < 0) throw std::invalid_argument("FourierField: negative dimension");
  if (!(s > 0)) throw std::invalid_argument("FourierField: width must be positive");
  if (tau < 0) throw std::invalid_argument("FourierField: negative action radius");
}

void FourierField::set_width(double s) {
  if (!(s > 0)) throw std::invalid_argument("FourierField: width must be positive");
  s_ = s;
}

void FourierField::set_radius(double tau) {
  if (tau < 0) throw std::invalid_argument("FourierField: negative action radius");
  tau_ = tau;
}

void FourierField::set_raw(const ModeIndex& m, complex c) {
  if (static_cast<int>(m.k.size()) != d_) throw std::invalid_argument("FourierField: mode dimension mismatch");
  if (m.order() > cutoff_) throw std::out_of_range("FourierField: mode above cutoff");
  if (c == complex(0.0, 0.0)) {
    coeffs_.erase(m);
  } else {
    coeffs_[m] = c;
  }
}

void FourierField::assign(const ModeIndex& m, complex c) {
  if (m.is_zero()) {
    set_raw(m, complex(c.real(), 0.0));
    return;
  }
  set_raw(m, c);
  set_raw(m.negated(), std::conj(c));
}

void FourierField::add(const ModeIndex& m, complex c) { assign(m, coeff(m) + c); }

complex FourierField::coeff(const ModeIndex& m) const {
  auto it = coeffs_.find(m);
  return it == coeffs_.end() ? complex(0.0, 0.0) : it->second;
}

int FourierField::max_order() const {
  int o = 0;
  for (const auto& [m, c] : coeffs_) o = std::max(o, m.order());
  return o;
}

int FourierField::max_index(int j) const {
  int o = 0;
  for (const auto& [m, c] : coeffs_) o = std::max(o, std::abs(j < d_ ? m.k[j] : m.l));
  return o;
}

double FourierField::evaluate(std::span<const double> theta, double t) const {
  if (static_cast<int>(theta.size()) != d_) throw std::invalid_argument("evaluate: angle dimension mismatch");
  complex sum(0.0, 0.0);
  double mag = 0.0;
  for (const auto& [m, c] : coeffs_) {
    double arg = m.l * t;
    for (int j = 0; j < d_; ++j) arg += m.k[j] * theta[j];
    sum += c * complex(std::cos(arg), std::sin(arg));
    mag += std::abs(c);
  }
  if (std::abs(sum.imag()) > 1e-12 * std::max(1.0, mag))
    throw std::runtime_error("evaluate: imaginary residue, reality invariant broken");
  return sum.real();
}

double FourierField::reality_defect() const {
  double worst = 0.0;
  for (const auto& [m, c] : coeffs_) worst = std::max(worst, std::abs(c - std::conj(coeff(m.negated()))));
  return worst;
}

void FourierField::symmetrize(double tol) {
  if (reality_defect() > tol) throw std::runtime_error("symmetrize: reality drift above tolerance");
  std::map<ModeIndex, complex> out;
  for (const auto& [m, c] : coeffs_) {
    complex v = 0.5 * (c + std::conj(coeff(m.negated())));
    if (m.is_zero()) v = complex(v.real(), 0.0);
    out[m] = v;
    out[m.negated()] = std::conj(v);
  }
  coeffs_ = std::move(out);
}

void FourierField::prune(double tol) {
  std::erase_if(coeffs_, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
}

FourierField& FourierField::operator+=(const FourierField& o) {
  if (o.d_ != d_) throw std::invalid_argument("FourierField: dimension mismatch");
  for (const auto& [m, c] : o.coeffs_) {
    cutoff_ = std::max(cutoff_, m.order());
    set_raw(m, coeff(m) + c);
  }
  s_ = std::min(s_, o.s_);
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& o) {
  FourierField neg = o;
  neg *= -1.0;
  return *this += neg;
}

FourierField& FourierField::operator*=(double a) {
  if (a == 0.0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [m, c] : coeffs_) c *= a;
  return *this;
}

FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
FourierField operator*(double s, FourierField a) { return a *= s; }

FourierField truncate(const FourierField& f, int K) {
  if (K < 0) throw std::invalid_argument("truncate: negative cutoff");
  FourierField out(f.dim(), f.width(), f.radius(), std::min(K, f.cutoff()));
  for (const auto& [m, c] : f.modes())
    if (m.order() <= K) out.assign(m, c);
  return out;
}

FourierField tail(const FourierField& f, int K) {
  FourierField out(f.dim(), f.width(), f.radius(), f.cutoff());
  for (const auto& [m, c] : f.modes())
    if (m.order() > K) out.assign(m, c);
  return out;
}

double analytic_norm(const FourierField& f, double s) {
  if (s > f.width()) throw std::invalid_argument("analytic_norm: width beyond the stored strip");
  double sum = 0.0;
  for (const auto& [m, c] : f.modes()) sum += std::abs(c) * std::exp(s * m.order());
  return sum;
}

FourierField derive(const FourierField& f, Derivative which) {
  if (which.axis == Axis::action)
    throw std::invalid_argument("derive: field has no action dependence (use NodeField)");
  if (which.axis == Axis::angle && (which.index < 0 || which.index >= f.dim()))
    throw std::out_of_range("derive: angle index");
  FourierField out(f.dim(), f.width(), f.radius(), f.cutoff());
  for (const auto& [m, c] : f.modes()) {
    int w = which.axis == Axis::time ? m.l : m.k[which.index];
    if (w != 0) out.assign(m, complex(0.0, w) * c);
  }
  return out;
}

FourierField angle_average(const FourierField& f) {
  FourierField out(f.dim(), f.width(), f.radius(), f.cutoff());
  for (const auto& [m, c] : f.modes())
    if (std::all_of(m.k.begin(), m.k.end(), [](int v) { return v == 0; })) out.assign(m, c);
  return out;
}

FourierField time_average(const FourierField& f) {
  FourierField out(f.dim(), f.width(), f.radius(), f.cutoff());
  ModeIndex zero{std::vector<int>(f.dim(), 0), 0};
  out.assign(zero, f.coeff(zero));
  return out;
}


FourierField multiply(const FourierField& f, const FourierField& g, int cap, double* dropped_mass) {
  if (f.dim() != g.dim()) throw std::invalid_argument("multiply: dimension mismatch");
  const int d = f.dim();
  int ka = 0;
  for (int j = 0; j < d; ++j) ka = std::max(ka, f.max_index(j) + g.max_index(j));
  int kt = f.max_index(d) + g.max_index(d);
  // Pointwise products are exact once the product band fits below Nyquist.
  spectral::Grid grid{d, 4, 4};
  while (grid.kmax() < ka) grid.n_angle *= 2;
  while (grid.lmax() < kt) grid.n_time *= 2;

  auto vf = spectral::to_values(spectral::from_field(f, grid), grid);
  auto vg = spectral::to_values(spectral::from_field(g, grid), grid);
  for (std::size_t i = 0; i < vf.size(); ++i) vf[i] = complex(vf[i].real() * vg[i].real(), 0.0);
  auto prod = spectral::to_coeffs(vf, grid);
  spectral::symmetrize(prod, grid);

  int natural = 2 * std::max(f.max_order(), g.max_order());
  int limit = cap >= 0 ? std::min(natural, cap) : natural;
  spectral::Coeffs rest;
  spectral::truncate_order(prod, grid, limit, &rest);
  if (dropped_mass) {
    double m = 0.0;
    for (const auto& c : rest) m += std::abs(c);
    *dropped_mass = m;
  }
  auto out = spectral::to_field(prod, grid, std::min(f.width(), g.width()), std::max(f.radius(), g.radius()),
                                1e-300);
  FourierField res(d, out.width(), out.radius(), limit);
  for (const auto& [m, c] : out.modes()) res.assign(m, c);
  return res;
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string to_json(const FourierField& f) {
  std::string out = "{\"d\": " + std::to_string(f.dim()) + ", \"s\": " + num(f.width()) +
                    ", \"tau\": " + num(f.radius()) + ", \"cutoff\": " + std::to_string(f.cutoff()) +
                    ", \"modes\": [";
  bool first = true;
  for (const auto& [m, c] : f.modes()) {
    out += first ? "\n  " : ",\n  ";
    first = false;
    out += "{\"k\": [";
    for (std::size_t j = 0; j < m.k.size(); ++j) out += (j ? ", " : "") + std::to_string(m.k[j]);
    out += "], \"l\": " + std::to_string(m.l) + ", \"re\": " + num(c.real()) + ", \"im\": " + num(c.imag()) + "}";
  }
  out += first ? "]}" : "\n]}";
  return out;
}

FourierField field_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  FourierField f(j.at("d").get<int>(), j.at("s").get<double>(), j.at("tau").get<double>(),
                 j.at("cutoff").get<int>());
  for (const auto& m : j.at("modes")) {
    ModeIndex idx{m.at("k").get<std::vector<int>>(), m.at("l").get<int>()};
    complex c(m.at("re").get<double>(), m.at("im").get<double>());
    // Both halves of each pair are listed; assign() would overwrite the partner,
    // which is harmless when the file is consistent.
    f.assign(idx, c);
  }
  if (f.reality_defect() > 1e-12) throw std::runtime_error("field_from_json: coefficients are not conjugate-symmetric");
  return f;
}

}  // namespace kamforge
