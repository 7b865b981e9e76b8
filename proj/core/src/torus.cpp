#include "kamforge/torus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>
#include <stdexcept>

#include "compose.hpp"
#include "kamforge/parallel.hpp"

namespace kamforge {

namespace {

using spectral::Coeffs;
using spectral::Grid;
using json = nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Angle coefficients of c at time t, as real values on the base angle grid.
std::vector<double> slice_values(const Coeffs& c, const Grid& g, double t, const Grid& base) {
  const std::size_t na = g.angle_points();
  const int nt = g.n_time;
  std::vector<complex> ph(nt);
  for (int i = 0; i < nt; ++i)
    ph[i] = (nt % 2 == 0 && i == nt / 2) ? complex(0.0) : std::polar(1.0, spectral::wavenumber(i, nt) * t);
  Coeffs a(na);
  for (std::size_t k = 0; k < na; ++k) {
    complex s(0.0);
    for (int i = 0; i < nt; ++i) s += c[k * nt + i] * ph[i];
    a[k] = s;
  }
  auto r = spectral::resample_angles(a, g, base);
  spectral::angle_to_values_inplace(r, base);
  std::vector<double> out(r.size());
  for (std::size_t p = 0; p < r.size(); ++p) out[p] = r[p].real();
  return out;
}

// Time series (k = 0 row) of every node of f at time t.
std::vector<double> slice_row(const NodeField& f, double t) {
  const int nt = f.grid.n_time;
  std::vector<double> out(f.node_count());
  for (int n = 0; n < f.node_count(); ++n) {
    complex s(0.0);
    for (int i = 0; i < nt; ++i) {
      if (nt % 2 == 0 && i == nt / 2) continue;
      s += f.at[n][i] * std::polar(1.0, spectral::wavenumber(i, nt) * t);
    }
    out[n] = s.real();
  }
  return out;
}

// One change of variables seen from the torus: at a base point theta_o of the
// old angles and a new action rho, A = psi - theta_o and B = old action.
class Stage {
 public:
  virtual ~Stage() = default;
  virtual void prepare(double t) = 0;
  virtual void eval(std::size_t p, const double* rho, double* A, double* B) const = 0;
  virtual const ActionBox* box() const { return nullptr; }
};

// Normal-form step: A = d_rho S, B = rho + d_theta S, S on nodes.
class NodeStage : public Stage {
 public:
  NodeStage(const NodeField& S, const Grid& base) : S_(S), base_(base) {
    const int d = S.grid.d;
    for (int j = 0; j < d; ++j) {
      dr_.push_back(S.derive_action(j));
      dt_.push_back(S.derive_angle(j));
    }
  }
  void prepare(double t) override {
    const int d = S_.grid.d, nn = S_.node_count();
    const std::size_t np = base_.angle_points();
    vr_.assign(d, std::vector<double>(np * nn));
    vt_.assign(d, std::vector<double>(np * nn));
    for (int j = 0; j < d; ++j)
      for (int n = 0; n < nn; ++n) {
        auto a = slice_values(dr_[j].at[n], S_.grid, t, base_);
        auto b = slice_values(dt_[j].at[n], S_.grid, t, base_);
        for (std::size_t p = 0; p < np; ++p) {
          vr_[j][p * nn + n] = a[p];
          vt_[j][p * nn + n] = b[p];
        }
      }
  }
  void eval(std::size_t p, const double* rho, double* A, double* B) const override {
    const int d = S_.grid.d, nn = S_.node_count();
    std::vector<double> w(nn);
    S_.box.fast_weights(rho, w.data());
    for (int j = 0; j < d; ++j) {
      A[j] = detail::dot(w.data(), &vr_[j][p * nn], nn);
      B[j] = rho[j] + detail::dot(w.data(), &vt_[j][p * nn], nn);
    }
  }
  const ActionBox* box() const override { return &S_.box; }

 private:
  const NodeField& S_;
  Grid base_;
  std::vector<NodeField> dr_, dt_;
  std::vector<std::vector<double>> vr_, vt_;
};

// Time averaging: A = d_rho S~(t, rho), actions unchanged.
class AverageStage : public Stage {
 public:
  explicit AverageStage(const NodeField& S) : S_(S) {
    for (int j = 0; j < S.grid.d; ++j) dr_.push_back(S.derive_action(j));
  }
  void prepare(double t) override {
    v_.clear();
    for (const auto& f : dr_) v_.push_back(slice_row(f, t));
  }
  void eval(std::size_t, const double* rho, double* A, double* B) const override {
    const int d = S_.grid.d, nn = S_.node_count();
    std::vector<double> w(nn);
    S_.box.fast_weights(rho, w.data());
    for (int j = 0; j < d; ++j) {
      A[j] = detail::dot(w.data(), v_[j].data(), nn);
      B[j] = rho[j];
    }
  }
  const ActionBox* box() const override { return &S_.box; }

 private:
  const NodeField& S_;
  std::vector<NodeField> dr_;
  std::vector<std::vector<double>> v_;
};

class ShiftStage : public Stage {
 public:
  explicit ShiftStage(std::vector<double> c) : c_(std::move(c)) {}
  void prepare(double) override {}
  void eval(std::size_t, const double* rho, double* A, double* B) const override {
    for (std::size_t j = 0; j < c_.size(); ++j) {
      A[j] = 0.0;
      B[j] = c_[j] + rho[j];
    }
  }

 private:
  std::vector<double> c_;
};

// KAM step: S = S0 + <S1, rho> + <S2 rho, rho>.
class KamStage : public Stage {
 public:
  KamStage(const KamChange& ch, const Grid& base) : ch_(ch), base_(base) {}
  void prepare(double t) override {
    const int d = ch_.grid.d;
    const Grid& g = ch_.grid;
    auto val = [&](const Coeffs& c) { return slice_values(c, g, t, base_); };
    s1_.clear();
    s2_.clear();
    u0_.clear();
    u1_.clear();
    u2_.clear();
    for (int i = 0; i < d; ++i) s1_.push_back(val(ch_.S1[i]));
    for (int i = 0; i < d * d; ++i) s2_.push_back(val(ch_.S2[i]));
    for (int j = 0; j < d; ++j) {
      u0_.push_back(val(spectral::derive_angle(ch_.S0, g, j)));
      for (int i = 0; i < d; ++i) u1_.push_back(val(spectral::derive_angle(ch_.S1[i], g, j)));
      for (int i = 0; i < d * d; ++i) u2_.push_back(val(spectral::derive_angle(ch_.S2[i], g, j)));
    }
  }
  void eval(std::size_t p, const double* rho, double* A, double* B) const override {
    const int d = ch_.grid.d;
    for (int i = 0; i < d; ++i) {
      double a = s1_[i][p];
      for (int k = 0; k < d; ++k) a += 2.0 * s2_[i * d + k][p] * rho[k];
      A[i] = a;
    }
    for (int j = 0; j < d; ++j) {
      double b = ch_.nu[j] + rho[j] + u0_[j][p];
      for (int i = 0; i < d; ++i) {
        b += u1_[j * d + i][p] * rho[i];
        for (int k = 0; k < d; ++k) b += u2_[(j * d + i) * d + k][p] * rho[i] * rho[k];
      }
      B[j] = b;
    }
  }

 private:
  const KamChange& ch_;
  Grid base_;
  std::vector<std::vector<double>> s1_, s2_, u0_, u1_, u2_;
};

// Off-grid evaluation of real angle series of one slice: half spectrum, tiny
// modes skipped.
class SliceSeries {
 public:
  SliceSeries(const Grid& base, const std::vector<std::vector<double>>& values, double drop)
      : d_(base.d), fields_(static_cast<int>(values.size())), kmax_(base.kmax()) {
    const std::size_t np = base.angle_points();
    std::vector<Coeffs> c(fields_);
    double total = 0.0;
    for (int f = 0; f < fields_; ++f) {
      c[f].assign(values[f].begin(), values[f].end());
      spectral::angle_to_coeffs_inplace(c[f], base);
      for (const auto& v : c[f]) total = std::max(total, std::abs(v));
    }
    std::vector<int> k(d_ + 1);
    for (std::size_t i = 0; i < np; ++i) {
      if (spectral::is_nyquist(base, i)) continue;
      spectral::decode(base, i, k.data());
      int lead = 0;
      for (int j = 0; j < d_ && lead == 0; ++j) lead = k[j];
      if (lead < 0) continue;
      double mag = 0.0;
      for (int f = 0; f < fields_; ++f) mag = std::max(mag, std::abs(c[f][i]));
      if (mag <= drop * total) continue;
      double w = lead == 0 ? 1.0 : 2.0;
      for (int j = 0; j < d_; ++j) k_.push_back(k[j]);
      for (int f = 0; f < fields_; ++f) c_.push_back(w * c[f][i]);
    }
  }

  void eval(const double* psi, double* out) const {
    const int span = 2 * kmax_ + 1;
    std::vector<complex> ph(static_cast<std::size_t>(d_) * span);
    for (int j = 0; j < d_; ++j) {
      complex* row = &ph[j * span + kmax_];
      row[0] = 1.0;
      complex e = std::polar(1.0, psi[j]);
      for (int q = 1; q <= kmax_; ++q) {
        row[q] = row[q - 1] * e;
        row[-q] = std::conj(row[q]);
      }
    }
    std::fill(out, out + fields_, 0.0);
    const std::size_t modes = k_.size() / d_;
    for (std::size_t m = 0; m < modes; ++m) {
      complex e = ph[k_[m * d_] + kmax_];
      for (int j = 1; j < d_; ++j) e *= ph[j * span + k_[m * d_ + j] + kmax_];
      for (int f = 0; f < fields_; ++f) out[f] += (c_[m * fields_ + f] * e).real();
    }
  }

 private:
  int d_, fields_, kmax_;
  std::vector<int> k_;
  std::vector<complex> c_;
};

json field_json(const Coeffs& c, const Grid& g) {
  double top = 0.0;
  for (const auto& v : c) top = std::max(top, std::abs(v));
  return json::parse(to_json(spectral::to_field(c, g, 1.0, 0.0, 1e-16 * top)));
}

Coeffs field_from(const json& j, const Grid& g) { return spectral::from_field(field_from_json(j.dump()), g); }

}  // namespace

std::pair<std::vector<double>, std::vector<double>> TorusEmbedding::angle_action(std::span<const double> phi,
                                                                                double t) const {
  std::vector<double> th(d), J(d);
  for (int j = 0; j < d; ++j) {
    th[j] = phi[j] + spectral::evaluate(theta_map[j], grid, phi, t);
    J[j] = spectral::evaluate(action_map[j], grid, phi, t);
  }
  return {th, J};
}

std::pair<std::vector<double>, std::vector<double>> TorusEmbedding::scaled_state(const ActionAngleMap& map,
                                                                                std::span<const double> phi,
                                                                                double t) const {
  auto [th, J] = angle_action(phi, t);
  for (int j = 0; j < d; ++j) {
    th[j] /= kTwoPi;
    th[j] -= std::floor(th[j]);
    J[j] *= kTwoPi;
  }
  return map.from_action_angle(th, J);
}

std::pair<std::vector<double>, std::vector<double>> TorusEmbedding::state(const ActionAngleMap& map,
                                                                         std::span<const double> phi,
                                                                         double t) const {
  auto [X, Y] = scaled_state(map, phi, t);
  const double vs = std::pow(A_tilde, n + 1);
  for (int j = 0; j < d; ++j) {
    X[j] *= A_tilde;
    Y[j] *= vs;
  }
  return {X, Y};
}

TorusEmbedding extract_torus(const HamiltonianSpec& spec, const ScaledSystem& sys, const NormalFormRun& nf,
                             const TimeAveraged& ta, const AveragedForm& F, const KamRun& kam,
                             const TorusParams& tp, TorusReport* report) {
  const int d = spec.d;
  const Grid base{d, tp.n_angle, 1};
  const Grid full{d, tp.n_angle, tp.n_time};
  const std::size_t np = base.angle_points();
  const int nt = tp.n_time;

  // Last change first.
  std::vector<std::unique_ptr<Stage>> stages;
  for (auto it = kam.changes.rbegin(); it != kam.changes.rend(); ++it)
    stages.push_back(std::make_unique<KamStage>(*it, base));
  stages.push_back(std::make_unique<ShiftStage>(F.I_star));
  stages.push_back(std::make_unique<AverageStage>(ta.S_tilde));
  for (auto it = nf.changes.rbegin(); it != nf.changes.rend(); ++it)
    stages.push_back(std::make_unique<NodeStage>(*it, base));

  TorusReport rep;
  // Final values: q (phi - phi_spec) and J at the base points, time fastest.
  std::vector<std::vector<double>> q_all(d, std::vector<double>(np * nt)), g_all(d, std::vector<double>(np * nt));
  std::vector<std::vector<double>> theta(d, std::vector<double>(np));
  for (std::size_t p = 0; p < np; ++p) {
    std::vector<int> idx(d);
    std::size_t rem = p;
    for (int j = d - 1; j >= 0; --j) {
      idx[j] = static_cast<int>(rem % tp.n_angle);
      rem /= tp.n_angle;
    }
    for (int j = 0; j < d; ++j) theta[j][p] = kTwoPi * idx[j] / tp.n_angle;
  }

  for (int it = 0; it < nt; ++it) {
    const double t = kTwoPi * it / nt;
    // Torus of the newest coordinates: rho = 0, phi = psi.
    std::vector<std::vector<double>> g(d, std::vector<double>(np, 0.0)), q(d, std::vector<double>(np, 0.0));
    for (auto& st : stages) {
      st->prepare(t);
      std::vector<std::vector<double>> gq(g);
      gq.insert(gq.end(), q.begin(), q.end());
      SliceSeries series(base, gq, tp.drop);
      std::vector<std::vector<double>> g_new(d, std::vector<double>(np)), q_new(d, std::vector<double>(np));
      std::vector<int> iters(np);
      std::vector<double> excursion(np, 0.0);
      const ActionBox* box = st->box();
      parallel_for(np, [&](std::size_t p) {
        std::vector<double> psi(d), A(d), B(d), gv(2 * d), th(d);
        for (int j = 0; j < d; ++j) psi[j] = th[j] = theta[j][p];
        int n_it = 0;
        for (;;) {
          series.eval(psi.data(), gv.data());
          st->eval(p, gv.data(), A.data(), B.data());
          double diff = 0.0;
          for (int j = 0; j < d; ++j) {
            double next = th[j] + A[j];
            diff = std::max(diff, std::abs(next - psi[j]));
            psi[j] = next;
          }
          ++n_it;
          if (diff <= 1e-14) break;
          if (n_it >= 100) throw ContractionFailure("extract_torus: fixed point did not converge");
        }
        series.eval(psi.data(), gv.data());
        st->eval(p, gv.data(), A.data(), B.data());
        for (int j = 0; j < d; ++j) {
          g_new[j][p] = B[j];
          q_new[j][p] = A[j] + gv[d + j];
        }
        iters[p] = n_it;
        if (box) {
          double e = 0.0;
          for (int j = 0; j < d; ++j) e = std::max(e, std::abs(gv[j] - box->center()[j]) / box->radius());
          excursion[p] = e;
        }
      });
      rep.max_iterations = std::max(rep.max_iterations, *std::max_element(iters.begin(), iters.end()));
      rep.max_excursion = std::max(rep.max_excursion, *std::max_element(excursion.begin(), excursion.end()));
      g = std::move(g_new);
      q = std::move(q_new);
    }
    for (int j = 0; j < d; ++j)
      for (std::size_t p = 0; p < np; ++p) {
        q_all[j][p * nt + it] = q[j][p];
        g_all[j][p * nt + it] = g[j][p];
        rep.max_reparam = std::max(rep.max_reparam, std::abs(q[j][p]));
      }
  }

  // phi = theta + q(theta): re-expand -q and J in phi.
  std::vector<std::vector<double>> jac(d * d, std::vector<double>(np * nt));
  for (int j = 0; j < d; ++j) {
    Coeffs c(q_all[j].begin(), q_all[j].end());
    spectral::to_coeffs_inplace(c, full);
    for (int i = 0; i < d; ++i) {
      auto dc = spectral::derive_angle(c, full, i);
      spectral::to_values_inplace(dc, full);
      for (std::size_t p = 0; p < dc.size(); ++p) jac[j * d + i][p] = dc[p].real();
    }
  }
  std::vector<const double*> jp(d * d);
  for (int i = 0; i < d * d; ++i) jp[i] = jac[i].data();
  auto det = detail::jacobian_det(jp, d, np * nt);

  TorusEmbedding out;
  out.d = d;
  out.n = sys.network.n;
  out.A_tilde = sys.A_tilde;
  out.frequency = F.frequency();
  out.I0 = spec.I0;
  out.grid = Grid{d, tp.n_out, nt};
  out.theta_map.resize(d);
  out.action_map.resize(d);
  std::vector<std::vector<double>> minus_q(d, std::vector<double>(np * nt));
  std::vector<const double*> shift(d), integrands;
  std::vector<Coeffs*> outputs;
  for (int j = 0; j < d; ++j) {
    for (std::size_t p = 0; p < np * nt; ++p) minus_q[j][p] = -q_all[j][p];
    shift[j] = q_all[j].data();
    integrands.push_back(minus_q[j].data());
    outputs.push_back(&out.theta_map[j]);
  }
  for (int j = 0; j < d; ++j) {
    integrands.push_back(g_all[j].data());
    outputs.push_back(&out.action_map[j]);
  }
  detail::SlicePullback(out.grid, full).run(shift, det.data(), integrands, outputs);
  if (report) *report = rep;
  return out;
}

DefectReport invariance_defect(const TorusEmbedding& torus, const ScaledSystem& sys, const ActionAngleMap& map,
                               double T_check, std::size_t samples, std::uint64_t seed, double h) {
  const int d = torus.d;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, kTwoPi);
  std::vector<std::vector<double>> phi(samples, std::vector<double>(d));
  std::vector<double> t0(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    for (int j = 0; j < d; ++j) phi[s][j] = U(rng);
    t0[s] = U(rng);
  }
  double amp = 0.0;
  {
    auto [x, v] = torus.state(map, phi.empty() ? std::vector<double>(d, 0.0) : phi[0], 0.0);
    for (int j = 0; j < d; ++j) amp = std::max(amp, std::abs(x[j]));
  }
  if (h <= 0.0) h = default_step(sys.network.n, 2.0 * amp);
  const long steps = std::max(1L, std::lround(T_check / h));
  const double hh = T_check / steps;
  std::vector<double> err(samples);
  parallel_for(samples, [&](std::size_t s) {
    auto [x, v] = torus.state(map, phi[s], t0[s]);
    double t = t0[s];
    if (!advance(sys.network, x, v, t, hh, steps)) {
      err[s] = std::numeric_limits<double>::infinity();
      return;
    }
    std::vector<double> target(d);
    for (int j = 0; j < d; ++j) target[j] = phi[s][j] + torus.frequency[j] * T_check;
    auto [X, Y] = torus.scaled_state(map, target, t0[s] + T_check);
    std::vector<double> Xs, Ys;
    sys.to_scaled(x, v, Xs, Ys);
    double e = 0.0;
    for (int j = 0; j < d; ++j) e = std::max({e, std::abs(Xs[j] - X[j]), std::abs(Ys[j] - Y[j])});
    err[s] = e;
  });
  DefectReport r;
  r.samples = samples;
  for (double e : err) {
    if (std::isinf(e)) ++r.escaped;
    r.max_defect = std::max(r.max_defect, e);
    r.mean_defect += e / static_cast<double>(std::max<std::size_t>(samples, 1));
  }
  return r;
}

std::string to_json(const TorusEmbedding& torus) {
  json j;
  j["d"] = torus.d;
  j["n"] = torus.n;
  j["A_tilde"] = torus.A_tilde;
  j["frequency"] = torus.frequency;
  j["I0"] = torus.I0;
  j["n_angle"] = torus.grid.n_angle;
  j["n_time"] = torus.grid.n_time;
  j["theta_map"] = json::array();
  j["action_map"] = json::array();
  for (int i = 0; i < torus.d; ++i) {
    j["theta_map"].push_back(field_json(torus.theta_map[i], torus.grid));
    j["action_map"].push_back(field_json(torus.action_map[i], torus.grid));
  }
  return j.dump(1);
}

TorusEmbedding torus_from_json(const std::string& text) {
  json j = json::parse(text);
  TorusEmbedding t;
  t.d = j.at("d").get<int>();
  t.n = j.at("n").get<int>();
  t.A_tilde = j.at("A_tilde").get<double>();
  t.frequency = j.at("frequency").get<std::vector<double>>();
  t.I0 = j.at("I0").get<std::vector<double>>();
  t.grid = Grid{t.d, j.at("n_angle").get<int>(), j.at("n_time").get<int>()};
  for (int i = 0; i < t.d; ++i) {
    t.theta_map.push_back(field_from(j.at("theta_map").at(i), t.grid));
    t.action_map.push_back(field_from(j.at("action_map").at(i), t.grid));
  }
  if (static_cast<int>(t.frequency.size()) != t.d) throw std::invalid_argument("torus_from_json: bad frequency");
  return t;
}

}  // namespace kamforge
