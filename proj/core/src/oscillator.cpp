#include "kamforge/oscillator.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "kamforge/spectral.hpp"
#include "kamforge/symplectic.hpp"

namespace kamforge {

double compute_period(int n) {
  if (n < 0) throw std::invalid_argument("compute_period: n must be >= 0");
  const double p = 2.0 * n + 2.0;
  // tanh-sinh handles the inverse-square-root singularity at x = 1; the
  // complement argument (xc = 1 - x on the right half, per boost) keeps
  // 1 - x^p accurate there.
  auto f = [&](double x, double xc) {
    double gap = xc <= 0.0 ? 1.0 - std::pow(x, p) : -std::expm1(p * std::log1p(-xc));
    if (!(gap > 0.0)) return 0.0;  // endpoint probe; measure zero
    return std::sqrt((n + 1.0) / gap);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  double err = 0.0, l1 = 0.0;
  double I = integrator.integrate(f, 0.0, 1.0, 1e-14, &err, &l1);
  if (!(err <= 1e-11 * std::abs(I)))
    throw std::runtime_error("compute_period: quadrature did not converge (error estimate " + std::to_string(err / I) + ")");
  return 4.0 * I;
}

namespace {

double synth(const std::vector<double>& a, const std::vector<double>& b, double psi) {
  // Sum from the top with a rotating phasor; K is small (N/2).
  const std::complex<double> z = std::polar(1.0, psi);
  std::complex<double> zk = 1.0;
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    s += a[k] * zk.real() + b[k] * zk.imag();
    zk *= z;
  }
  return s;
}

void trig_coeffs(const std::vector<double>& samples, std::vector<double>& a, std::vector<double>& b,
                 FourierField& field) {
  const int N = static_cast<int>(samples.size());
  spectral::Grid g{1, N, 1};
  spectral::Coeffs v(samples.begin(), samples.end());
  auto c = spectral::to_coeffs(v, g);
  spectral::symmetrize(c, g);
  a.assign(N / 2, 0.0);
  b.assign(N / 2, 0.0);
  a[0] = c[0].real();
  for (int k = 1; k < N / 2; ++k) {
    a[k] = 2.0 * c[k].real();
    b[k] = -2.0 * c[k].imag();
  }
  field = spectral::to_field(c, g, 1.0, 0.0, 1e-18);
}

}  // namespace

double ReferenceOrbit::u0(double t) const { return synth(au, bu, 2.0 * std::numbers::pi * t / T0); }
double ReferenceOrbit::v0(double t) const { return synth(av, bv, 2.0 * std::numbers::pi * t / T0); }

std::pair<double, double> ReferenceOrbit::state(double t) const {
  const double psi = 2.0 * std::numbers::pi * t / T0;
  const std::complex<double> z = std::polar(1.0, psi);
  std::complex<double> zk = 1.0;
  double su = 0.0, sv = 0.0;
  for (std::size_t k = 0; k < au.size(); ++k) {
    su += au[k] * zk.real() + bu[k] * zk.imag();
    sv += av[k] * zk.real() + bv[k] * zk.imag();
    zk *= z;
  }
  return {su, sv};
}

ReferenceOrbit reference_solution(int n, int N) {
  if (n < 0) throw std::invalid_argument("reference_solution: n must be >= 0");
  if (N < 64 || (N & (N - 1)) != 0) throw std::invalid_argument("reference_solution: N must be a power of two >= 64");
  ReferenceOrbit orb;
  orb.n = n;
  orb.T0 = compute_period(n);
  const int sub = std::max(1, static_cast<int>(std::ceil(orb.T0 / N / 0.004)));
  const double h = orb.T0 / (static_cast<double>(N) * sub);
  const int p = 2 * n + 1;
  double x = 1.0, y = 0.0;
  auto drift = [&](double a) { x += a * y; };
  auto kick = [&](double a) { y -= a * std::pow(x, p); };
  orb.u.resize(N);
  orb.v.resize(N);
  double worst = 0.0;
  for (int j = 0; j < N; ++j) {
    orb.u[j] = x;
    orb.v[j] = y;
    worst = std::max(worst, std::abs((n + 1.0) * y * y + std::pow(x, 2 * n + 2) - 1.0));
    for (int s = 0; s < sub; ++s) symplectic::sixth_order_step(h, drift, kick);
  }
  worst = std::max(worst, std::abs((n + 1.0) * y * y + std::pow(x, 2 * n + 2) - 1.0));
  if (worst > 1e-10)
    throw std::runtime_error("reference_solution: energy drift " + std::to_string(worst) + " exceeds 1e-10");
  trig_coeffs(orb.u, orb.au, orb.bu, orb.fourier_u);
  trig_coeffs(orb.v, orb.av, orb.bv, orb.fourier_v);
  return orb;
}

ActionAngleMap::ActionAngleMap(int n, int m, int samples)
    : n_(n), m_(m), alpha_(1.0 / (n + 2.0)), orbit_(reference_solution(n, samples)) {
  if (m < 1) throw std::invalid_argument("ActionAngleMap: need at least one oscillator");
  c_ = 1.0 / (alpha_ * orbit_.T0);
}

std::pair<double, double> ActionAngleMap::forward(double theta, double I) const {
  if (!(I > 0)) throw std::invalid_argument("from_action_angle: actions must be positive");
  auto [u, v] = orbit_.state(theta * orbit_.T0);
  return {std::pow(c_ * I, alpha_) * u, std::pow(c_ * I, beta()) * v};
}

double ActionAngleMap::energy(double I) const {
  return std::pow(c_, 2.0 * beta()) / (2.0 * (n_ + 1)) * std::pow(I, 2.0 * (n_ + 1) / (n_ + 2.0));
}

double ActionAngleMap::action_of_energy(double E) const {
  // E = X^{2n+2}/(2n+2) on the orbit of amplitude X = (cI)^alpha.
  double X = std::pow((2.0 * n_ + 2.0) * E, 1.0 / (2.0 * n_ + 2.0));
  return std::pow(X, n_ + 2.0) / c_;
}

std::pair<double, double> ActionAngleMap::inverse(double x, double y) const {
  const double E = 0.5 * y * y + std::pow(x, 2 * n_ + 2) / (2.0 * n_ + 2.0);
  if (E < 1e-12) throw std::domain_error("to_action_angle: point too close to the equilibrium");
  const double I = action_of_energy(E);
  const double a = x / std::pow(c_ * I, alpha_);
  const double b = y / std::pow(c_ * I, beta());
  // Coarse phase from the sample table, then Gauss-Newton along the orbit
  // using u0' = v0, v0' = -u0^{2n+1}.
  const auto& U = orbit_.u;
  const auto& V = orbit_.v;
  const int N = static_cast<int>(U.size());
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (int j = 0; j < N; ++j) {
    double dd = (U[j] - a) * (U[j] - a) + (V[j] - b) * (V[j] - b);
    if (dd < bd) {
      bd = dd;
      best = j;
    }
  }
  double t = orbit_.T0 * best / N;
  for (int it = 0; it < 8; ++it) {
    auto [u, v] = orbit_.state(t);
    double du = v, dv = -std::pow(u, 2 * n_ + 1);
    double step = ((u - a) * du + (v - b) * dv) / (du * du + dv * dv);
    t -= step;
    if (std::abs(step) < 1e-15 * orbit_.T0) break;
  }
  double theta = t / orbit_.T0;
  theta -= std::floor(theta);
  return {theta, I};
}

std::pair<std::vector<double>, std::vector<double>> ActionAngleMap::from_action_angle(
    std::span<const double> theta, std::span<const double> I) const {
  if (static_cast<int>(theta.size()) != m_ || static_cast<int>(I.size()) != m_)
    throw std::invalid_argument("from_action_angle: dimension mismatch");
  std::vector<double> x(m_), y(m_);
  for (int j = 0; j < m_; ++j) std::tie(x[j], y[j]) = forward(theta[j], I[j]);
  return {x, y};
}

std::pair<std::vector<double>, std::vector<double>> ActionAngleMap::to_action_angle(std::span<const double> x,
                                                                                    std::span<const double> y) const {
  if (static_cast<int>(x.size()) != m_ || static_cast<int>(y.size()) != m_)
    throw std::invalid_argument("to_action_angle: dimension mismatch");
  std::vector<double> th(m_), I(m_);
  for (int j = 0; j < m_; ++j) std::tie(th[j], I[j]) = inverse(x[j], y[j]);
  return {th, I};
}

}  // namespace kamforge
