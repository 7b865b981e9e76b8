#include "kamforge/duffing.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <stdexcept>

#include "kamforge/io.hpp"
#include "kamforge/parallel.hpp"
#include "kamforge/spectral.hpp"
#include "kamforge/symplectic.hpp"

namespace kamforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double ipow(double x, int e) {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

// Flattened network used in the integration loop.
struct Compiled {
  int m = 0, n = 0;
  struct T {
    std::vector<int> alpha;
    std::vector<int> l;
    std::vector<complex> c;
  };
  std::vector<T> terms;
  int lmax = 0;
  mutable std::vector<complex> phase;

  explicit Compiled(const DuffingNetwork& net) : m(net.m), n(net.n) {
    for (const auto& term : net.terms) {
      T t{term.alpha, {}, {}};
      for (const auto& [mode, c] : term.p.modes()) {
        t.l.push_back(mode.l);
        t.c.push_back(c);
        lmax = std::max(lmax, std::abs(mode.l));
      }
      terms.push_back(std::move(t));
    }
    phase.resize(2 * lmax + 1);
  }

  void set_time(double t) const {
    complex z = std::polar(1.0, t), zp = 1.0;
    phase[lmax] = 1.0;
    for (int l = 1; l <= lmax; ++l) {
      zp *= z;
      phase[lmax + l] = zp;
      phase[lmax - l] = std::conj(zp);
    }
  }

  double coef(const T& t) const {
    double s = 0.0;
    for (std::size_t i = 0; i < t.l.size(); ++i) s += (t.c[i] * phase[lmax + t.l[i]]).real();
    return s;
  }

  // grad V = x^{2n+1} + grad F at the time set by set_time.
  void force(const double* x, double* g) const {
    for (int j = 0; j < m; ++j) g[j] = ipow(x[j], 2 * n + 1);
    for (const auto& t : terms) {
      double p = coef(t);
      if (p == 0.0) continue;
      for (int j = 0; j < m; ++j) {
        if (t.alpha[j] == 0) continue;
        double v = p * t.alpha[j];
        for (int i = 0; i < m; ++i) v *= ipow(x[i], t.alpha[i] - (i == j ? 1 : 0));
        g[j] += v;
      }
    }
  }
};

}  // namespace

void DuffingNetwork::add_term(std::vector<int> alpha, FourierField p) {
  terms.push_back(Term{std::move(alpha), std::move(p)});
}

void DuffingNetwork::validate() const {
  if (m < 1) throw std::invalid_argument("DuffingNetwork: m must be >= 1");
  if (n < 0) throw std::invalid_argument("DuffingNetwork: n must be >= 0");
  for (const auto& t : terms) {
    if (static_cast<int>(t.alpha.size()) != m) throw std::invalid_argument("DuffingNetwork: alpha length != m");
    int deg = 0;
    for (int v : t.alpha) {
      if (v < 0) throw std::invalid_argument("DuffingNetwork: negative exponent");
      deg += v;
    }
    if (deg > 2 * n + 1) throw std::invalid_argument("DuffingNetwork: monomial degree above 2n+1");
    if (t.p.dim() != 0) throw std::invalid_argument("DuffingNetwork: coefficients depend on time only");
    if (t.p.reality_defect() > 1e-12) throw std::invalid_argument("DuffingNetwork: complex coefficient");
  }
}

int DuffingNetwork::max_time_mode() const {
  int l = 0;
  for (const auto& t : terms) l = std::max(l, t.p.max_index(0));
  return l;
}

double DuffingNetwork::potential(std::span<const double> x, double t) const {
  double s = 0.0;
  for (const auto& term : terms) {
    double mono = 1.0;
    for (int j = 0; j < m; ++j) mono *= ipow(x[j], term.alpha[j]);
    s += term.p.evaluate({}, t) * mono;
  }
  return s;
}

void DuffingNetwork::potential_gradient(std::span<const double> x, double t, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  for (const auto& term : terms) {
    double p = term.p.evaluate({}, t);
    for (int j = 0; j < m; ++j) {
      if (term.alpha[j] == 0) continue;
      double v = p * term.alpha[j];
      for (int i = 0; i < m; ++i) v *= ipow(x[i], term.alpha[i] - (i == j ? 1 : 0));
      grad[j] += v;
    }
  }
}

DuffingNetwork network_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  DuffingNetwork net;
  net.m = j.at("m").get<int>();
  net.n = j.at("n").get<int>();
  for (const auto& term : j.at("terms")) {
    // Entries are complex coefficients p^(l); the -l partner is the conjugate.
    FourierField p(0);
    for (const auto& md : term.at("modes")) {
      ModeIndex mi{{}, md.at("l").get<int>()};
      p.assign(mi, complex(md.at("re").get<double>(), md.value("im", 0.0)));
    }
    net.add_term(term.at("alpha").get<std::vector<int>>(), std::move(p));
  }
  net.validate();
  return net;
}

std::string to_json(const DuffingNetwork& net) {
  std::string s = "{\"m\": " + std::to_string(net.m) + ", \"n\": " + std::to_string(net.n) + ", \"terms\": [";
  for (std::size_t i = 0; i < net.terms.size(); ++i) {
    const auto& t = net.terms[i];
    s += i ? ", " : "";
    s += "{\"alpha\": [";
    for (std::size_t j = 0; j < t.alpha.size(); ++j) s += (j ? ", " : "") + std::to_string(t.alpha[j]);
    s += "], \"modes\": [";
    bool first = true;
    for (const auto& [mode, c] : t.p.modes()) {
      if (mode.l < 0) continue;
      complex v = c;
      s += first ? "" : ", ";
      first = false;
      s += "{\"l\": " + std::to_string(mode.l) + ", \"re\": " + io::format_double(v.real()) +
           ", \"im\": " + io::format_double(v.imag()) + "}";
    }
    s += "]}";
  }
  s += "]}";
  return s;
}

std::pair<std::vector<double>, std::vector<double>> vector_field(const DuffingNetwork& net,
                                                                 std::span<const double> x,
                                                                 std::span<const double> xdot, double t) {
  std::vector<double> g(net.m);
  net.potential_gradient(x, t, g);
  std::vector<double> acc(net.m);
  for (int j = 0; j < net.m; ++j) acc[j] = -ipow(x[j], 2 * net.n + 1) - g[j];
  return {std::vector<double>(xdot.begin(), xdot.end()), acc};
}

double oscillator_energy(int n, double x, double v) { return 0.5 * v * v + ipow(x, 2 * n + 2) / (2.0 * n + 2.0); }

bool advance(const DuffingNetwork& net, std::vector<double>& x, std::vector<double>& v, double& t, double h,
             long steps) {
  Compiled C(net);
  std::vector<double> g(net.m);
  auto drift = [&](double a) {
    for (int j = 0; j < net.m; ++j) x[j] += a * v[j];
    t += a;
  };
  auto kick = [&](double a) {
    C.set_time(t);
    C.force(x.data(), g.data());
    for (int j = 0; j < net.m; ++j) v[j] -= a * g[j];
  };
  for (long s = 0; s < steps; ++s) {
    symplectic::sixth_order_step(h, drift, kick);
    for (double xi : x)
      if (!(std::abs(xi) <= 1e8)) return false;
  }
  return true;
}

Trajectory integrate(const DuffingNetwork& net, std::span<const double> x0, std::span<const double> v0, double T,
                     double h, int stride) {
  if (!(h > 0)) throw std::invalid_argument("integrate: step must be positive");
  if (stride < 1) throw std::invalid_argument("integrate: stride must be >= 1");
  const double ratio = T / h;
  const long steps = std::lround(ratio);
  if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("integrate: T / h must be an integer");
  Trajectory tr;
  tr.m = net.m;
  std::vector<double> x(x0.begin(), x0.end()), v(v0.begin(), v0.end());
  auto push = [&](double t) {
    tr.t.push_back(t);
    tr.x.insert(tr.x.end(), x.begin(), x.end());
    tr.v.insert(tr.v.end(), v.begin(), v.end());
  };
  push(0.0);
  double t = 0.0;
  for (long s = 0; s < steps; s += stride) {
    long chunk = std::min<long>(stride, steps - s);
    if (!advance(net, x, v, t, h, chunk)) {
      tr.escaped = true;
      tr.escape_time = t;
      break;
    }
    // Recompute t from the step count to avoid drift in the sample times.
    t = (s + chunk) * h;
    push(t);
  }
  return tr;
}

double default_step(int n, double amplitude) {
  double T0 = compute_period(n);
  double scale = n == 0 ? 1.0 : std::pow(std::max(amplitude, 1e-8), static_cast<double>(n));
  return T0 / scale / 256.0;
}

void ScaledSystem::to_original(std::span<const double> xs, std::span<const double> y, std::vector<double>& x,
                               std::vector<double>& v) const {
  const int n = network.n;
  x.resize(xs.size());
  v.resize(y.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    x[j] = A_tilde * xs[j];
    v[j] = std::pow(A_tilde, n + 1) * y[j];
  }
}

void ScaledSystem::to_scaled(std::span<const double> x, std::span<const double> v, std::vector<double>& xs,
                             std::vector<double>& y) const {
  const int n = network.n;
  xs.resize(x.size());
  y.resize(v.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    xs[j] = x[j] / A_tilde;
    y[j] = v[j] / std::pow(A_tilde, n + 1);
  }
}

IntegrableHamiltonian duffing_h0(const ActionAngleMap& map) {
  const int n = map.n();
  const double p = 2.0 * (n + 1) / (n + 2.0);
  const double coef = std::pow(map.c(), 2.0 * map.beta()) / (2.0 * (n + 1)) * std::pow(kTwoPi, p);
  return IntegrableHamiltonian::power_law(map.m(), coef, p);
}

HamiltonianSpec to_hamiltonian_spec(const ScaledSystem& sys, const ActionAngleMap& map,
                                    std::span<const double> I0, std::span<const double> box_lo,
                                    std::span<const double> box_hi, const NormalFormParams& params,
                                    const DiophantineParams& dc, double* alias_mass) {
  const auto& net = sys.network;
  net.validate();
  const int d = net.m;
  if (map.n() != net.n || map.m() != d) throw std::invalid_argument("to_hamiltonian_spec: map does not match network");
  if (static_cast<int>(I0.size()) != d) throw std::invalid_argument("to_hamiltonian_spec: I0 has wrong length");
  std::vector<double> J0(d);
  for (int j = 0; j < d; ++j) {
    if (!(box_lo[j] > 0)) throw std::invalid_argument("to_hamiltonian_spec: action box must be positive");
    J0[j] = I0[j] / kTwoPi;
    if (I0[j] - kTwoPi * params.tau0 < box_lo[j] || I0[j] + kTwoPi * params.tau0 > box_hi[j])
      throw std::invalid_argument("to_hamiltonian_spec: B(tau0) leaves the action box");
  }

  HamiltonianSpec spec;
  spec.d = d;
  spec.eps = sys.eps();
  spec.a = sys.a();
  spec.b = sys.b();
  spec.H0 = duffing_h0(map);
  spec.I0 = J0;
  spec.params = params;
  spec.dc = dc;
  spec.dc.eps = spec.eps;
  spec.dc.a = spec.a;

  const spectral::Grid work{d, params.n_angle, params.n_time};
  ActionBox box(J0, params.tau0, params.nodes);
  spec.R = NodeField(work, box);

  const double pref = std::pow(spec.eps, spec.b) * std::pow(sys.A_tilde, -(net.n + 2.0));
  int nt = 8;
  while (nt < 4 * (net.max_time_mode() + 1)) nt *= 2;
  nt = std::max(nt, params.n_time);
  int ns = std::max(64, params.n_angle);
  Compiled C(net);

  double worst_alias = 0.0;
  for (int attempt = 0;; ++attempt) {
    const spectral::Grid g{d, ns, nt};
    std::vector<double> u0(ns);
    for (int i = 0; i < ns; ++i) u0[i] = map.orbit().u0(map.T0() * i / ns);
    std::vector<spectral::Coeffs> coeffs(box.node_count());
    std::vector<double> alias(box.node_count(), 0.0);
    parallel_for(box.node_count(), [&](std::size_t nidx) {
      auto J = box.node(static_cast<int>(nidx));
      std::vector<double> amp(d);
      for (int j = 0; j < d; ++j) amp[j] = sys.A_tilde * std::pow(map.c() * kTwoPi * J[j], map.alpha());
      spectral::Coeffs v(g.size());
      std::vector<double> x(d);
      std::vector<int> idx(d);
      for (std::size_t ap = 0; ap < g.angle_points(); ++ap) {
        std::size_t rem = ap;
        for (int j = d - 1; j >= 0; --j) {
          idx[j] = static_cast<int>(rem % ns);
          rem /= ns;
        }
        for (int j = 0; j < d; ++j) x[j] = amp[j] * u0[idx[j]];
        for (int it = 0; it < nt; ++it) {
          double t = kTwoPi * it / nt;
          C.set_time(t);
          double F = 0.0;
          for (const auto& term : C.terms) {
            double mono = 1.0;
            for (int j = 0; j < d; ++j) mono *= ipow(x[j], term.alpha[j]);
            F += C.coef(term) * mono;
          }
          v[ap * nt + it] = pref * F;
        }
      }
      spectral::to_coeffs_inplace(v, g);
      // Mass in the upper half of the band measures how well the grid resolves R.
      double total = 0.0, high = 0.0;
      int k[16];
      for (std::size_t i = 0; i < v.size(); ++i) {
        double a = std::abs(v[i]);
        total += a;
        int l = spectral::decode(g, i, k);
        bool hi = std::abs(l) > nt / 4;
        for (int j = 0; j < d; ++j) hi = hi || std::abs(k[j]) > ns / 4;
        if (hi) high += a;
      }
      alias[nidx] = total > 0 ? high / total : 0.0;
      coeffs[nidx] = std::move(v);
    });
    worst_alias = *std::max_element(alias.begin(), alias.end());
    if (worst_alias < 1e-10 || attempt >= 3) {
      for (int nidx = 0; nidx < box.node_count(); ++nidx) {
        auto c = spectral::resample(coeffs[nidx], g, work);
        spectral::symmetrize(c, work);
        spec.R.at[nidx] = std::move(c);
      }
      break;
    }
    ns *= 2;
    if (d <= 2) nt *= 2;
  }
  if (alias_mass) *alias_mass = worst_alias;
  return spec;
}

StabilityMetrics stability_metrics(const Trajectory& traj, int n) {
  StabilityMetrics s;
  s.escaped = traj.escaped;
  const int m = traj.m;
  if (traj.size() == 0) return s;
  std::vector<double> E0(m);
  for (int j = 0; j < m; ++j) E0[j] = oscillator_energy(n, traj.x[j], traj.v[j]);
  const double expo = (n + 2.0) / (2.0 * n + 2.0);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
      double x = traj.x[i * m + j], v = traj.v[i * m + j];
      sum += std::abs(x) + std::abs(v);
      if (E0[j] > 0) {
        double r = std::pow(oscillator_energy(n, x, v) / E0[j], expo) - 1.0;
        s.action_variation = std::max(s.action_variation, std::abs(r));
      }
    }
    s.sup_norm = std::max(s.sup_norm, sum);
  }
  return s;
}

std::vector<double> rotation_vector(const Trajectory& traj, const ActionAngleMap& map, double A_tilde) {
  const int m = traj.m;
  const std::size_t N = traj.size();
  if (N < 2) throw std::invalid_argument("rotation_vector: need at least two samples");
  const double vs = std::pow(A_tilde, map.n() + 1);
  std::vector<double> theta(N * m);
  parallel_for(N, [&](std::size_t i) {
    for (int j = 0; j < m; ++j) {
      try {
        theta[i * m + j] = map.inverse(traj.x[i * m + j] / A_tilde, traj.v[i * m + j] / vs).first;
      } catch (const std::domain_error&) {
        throw std::runtime_error("rotation_vector: trajectory left the action-angle chart");
      }
    }
  });
  std::vector<double> out(m);
  for (int j = 0; j < m; ++j) {
    // Unwrap, then least-squares slope.
    double prev = theta[j], acc = theta[j];
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < N; ++i) {
      if (i > 0) {
        double dth = theta[i * m + j] - prev;
        dth -= std::nearbyint(dth);
        acc += dth;
        prev = theta[i * m + j];
      }
      double t = traj.t[i];
      st += t;
      sy += acc;
      stt += t * t;
      sty += t * acc;
    }
    double n = static_cast<double>(N);
    out[j] = kTwoPi * (n * sty - st * sy) / (n * stt - st * st);
  }
  return out;
}

}  // namespace kamforge
