#include "kamforge/normal_form.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "compose.hpp"
#include "kamforge/parallel.hpp"

namespace kamforge {

namespace {

using spectral::Coeffs;
using spectral::Grid;

bool all_zero(const NodeField& f) {
  for (const auto& a : f.at)
    for (const auto& c : a)
      if (c != complex(0.0)) return false;
  return true;
}

std::vector<int> unit(int d, int j, int p = 1) {
  std::vector<int> o(d, 0);
  o[j] = p;
  return o;
}

// Value and derivatives of the (0, 0) mode of a nodal field.
double mean_value(const NodeField& f, std::span<const double> I, std::span<const int> orders = {}) {
  auto w = f.box.weights(I, orders);
  double s = 0.0;
  for (int n = 0; n < f.node_count(); ++n) s += w[n] * f.at[n][0].real();
  return s;
}

std::string mode_string(const std::vector<int>& k, int l) {
  std::string s = "(";
  for (std::size_t j = 0; j < k.size(); ++j) s += std::to_string(k[j]) + ",";
  return s + std::to_string(l) + ")";
}

}  // namespace

double NormalFormState::value(const HamiltonianSpec& spec, std::span<const double> phi, double t,
                              std::span<const double> J) const {
  double v = std::pow(spec.eps, -spec.a) * spec.H0.value(J);
  v += h.evaluate(phi, t, J) + R.evaluate(phi, t, J);
  if (!R_plus.at.empty()) v += R_plus.evaluate(phi, t, J);
  return v;
}

StepDiagnostics diagnostics(const NormalFormState& st) {
  StepDiagnostics d;
  d.j = st.j;
  d.K = st.K;
  d.s = st.s;
  d.tau = st.tau;
  d.norm_h = st.h.norm(st.s);
  d.norm_R = st.R.norm(st.s, true);
  d.norm_R_plus = st.R_plus.norm(st.s);
  d.reality = std::max(st.R.reality_defect(), st.R_plus.reality_defect());
  return d;
}

NormalFormState split_tail(const HamiltonianSpec& spec) {
  const auto& g = spec.R.grid;
  NormalFormState st;
  st.j = 0;
  st.s = spec.params.s(0);
  st.tau = spec.params.tau(0);
  st.K = spec.params.K(0, spec.eps, g.max_order());
  if (std::abs(spec.R.box.radius() - st.tau) > 1e-14 * st.tau)
    throw std::invalid_argument("split_tail: R must live on B(tau0)");
  st.R = spec.R;
  st.R *= std::pow(spec.eps, -spec.b);
  st.R_plus = NodeField(g, spec.R.box);
  st.h = NodeField(g, spec.R.box);
  for (int n = 0; n < st.R.node_count(); ++n) spectral::truncate_order(st.R.at[n], g, st.K, &st.R_plus.at[n]);
  return st;
}

void check_divisors(const Coeffs& c, const Grid& g, std::span<const double> freq, const DiophantineParams& dc,
                    bool include_zero_angle, bool halved) {
  int k[16];
  const double scale = std::pow(dc.eps, -dc.a);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == complex(0.0) || spectral::is_nyquist(g, i)) continue;
    int l = spectral::decode(g, i, k);
    int kn = 0;
    for (int j = 0; j < g.d; ++j) kn += std::abs(k[j]);
    if (kn == 0 && (!include_zero_angle || l == 0)) continue;
    if (kn == 0) continue;  // |l| >= 1
    double lam = l;
    for (int j = 0; j < g.d; ++j) lam += k[j] * freq[j];
    double bound = kn + std::abs(l) <= dc.K_split ? scale * dc.gamma / std::pow(kn, g.d + 1)
                                                  : dc.gamma / std::pow(1.0 + kn, g.d + 1);
    if (halved) bound *= 0.5;
    if (std::abs(lam) < bound) {
      std::vector<int> kv(k, k + g.d);
      char buf[160];
      std::snprintf(buf, sizeof buf, "small divisor %.3e below %.3e at mode %s", std::abs(lam), bound,
                    mode_string(kv, l).c_str());
      throw DcFailure(buf, kv, l, std::abs(lam), bound);
    }
  }
}

FourierField solve_homological(const FourierField& R, std::span<const double> omega, double eps, double a, int K,
                               const DiophantineParams& dc) {
  const int d = R.dim();
  const double scale = std::pow(eps, -a);
  FourierField S(d, R.width(), R.radius());
  for (const auto& [m, c] : R.modes()) {
    if (m.order() > K) continue;
    int kn = 0;
    for (int v : m.k) kn += std::abs(v);
    if (kn == 0) continue;
    double lam = small_divisor(m.k, m.l, omega, eps, a);
    double signed_lam = m.l;
    for (int j = 0; j < d; ++j) signed_lam += scale * m.k[j] * omega[j];
    double bound = 0.5 * (m.order() <= dc.K_split ? scale * dc.gamma / std::pow(kn, d + 1)
                                                  : dc.gamma / std::pow(1.0 + kn, d + 1));
    if (lam < bound && c != complex(0.0)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "small divisor %.3e below %.3e at mode %s", lam, bound,
                    mode_string(m.k, m.l).c_str());
      throw DcFailure(buf, m.k, m.l, lam, bound);
    }
    S.assign(m, complex(0.0, 1.0) * c / signed_lam);
  }
  return S;
}

NodeField solve_homological(const NodeField& R, const IntegrableHamiltonian& H0, double eps, double a, int K,
                            const DiophantineParams& dc, double* min_divisor) {
  NodeField S(R.grid, R.box);
  std::vector<double> mins(R.node_count());
  DiophantineParams p = dc;
  p.eps = eps;
  p.a = a;
  parallel_for(R.node_count(), [&](std::size_t n) {
    auto freq = H0.gradient(R.box.node(static_cast<int>(n)));
    for (double& v : freq) v *= std::pow(eps, -a);
    Coeffs r = R.at[n];
    spectral::truncate_order(r, R.grid, K);
    check_divisors(r, R.grid, freq, p, false, true);
    spectral::DivisorReport rep;
    S.at[n] = spectral::solve_cohomological(r, R.grid, freq, K, false, &rep);
    mins[n] = rep.min_divisor;
  });
  if (min_divisor) *min_divisor = *std::min_element(mins.begin(), mins.end());
  return S;
}

PointChange apply_change(const NodeField& S, std::span<const double> phi, double t, std::span<const double> rho) {
  const int d = S.grid.d;
  std::vector<Coeffs> Sr(d);
  for (int j = 0; j < d; ++j) Sr[j] = S.combine(S.box.weights(rho, unit(d, j)));
  Coeffs S0 = S.at_action(rho);
  PointChange out;
  out.theta.assign(phi.begin(), phi.end());
  std::vector<double> next(d);
  for (int it = 1;; ++it) {
    double diff = 0.0;
    for (int j = 0; j < d; ++j) {
      next[j] = phi[j] - spectral::evaluate(Sr[j], S.grid, out.theta, t);
      diff = std::max(diff, std::abs(next[j] - out.theta[j]));
    }
    out.theta = next;
    out.iterations = it;
    if (diff <= 1e-15 * (1.0 + std::abs(phi[0]))) break;
    if (it >= 200) throw ContractionFailure("apply_change: fixed point did not converge");
  }
  out.I.resize(d);
  for (int j = 0; j < d; ++j)
    out.I[j] = rho[j] + spectral::evaluate(spectral::derive_angle(S0, S.grid, j), S.grid, out.theta, t);
  out.dS_dt = spectral::evaluate(spectral::derive_time(S0, S.grid), S.grid, out.theta, t);
  return out;
}

std::pair<std::vector<FourierField>, std::vector<FourierField>> canonical_change(const NodeField& S,
                                                                                std::span<const double> rho,
                                                                                int oversample) {
  const int d = S.grid.d;
  const Grid work = S.grid;
  const Grid fine = work.refined(oversample, oversample);
  Coeffs S0 = S.at_action(rho);
  std::vector<std::vector<double>> u(d), w(d), jac(d * d);
  for (int j = 0; j < d; ++j) {
    u[j] = detail::fine_values(spectral::derive_angle(S0, work, j), work, fine);
    Coeffs Sr = S.combine(S.box.weights(rho, unit(d, j)));
    w[j] = detail::fine_values(Sr, work, fine);
    for (int i = 0; i < d; ++i) jac[j * d + i] = detail::fine_values(spectral::derive_angle(Sr, work, i), work, fine);
  }
  std::vector<const double*> jp(d * d);
  for (int i = 0; i < d * d; ++i) jp[i] = jac[i].data();
  double op = detail::max_operator_norm(jp, d, fine.size());
  if (op > 0.5) throw ContractionFailure("canonical_change: |d2S/dtheta drho| = " + std::to_string(op) + " > 1/2");
  auto det = detail::jacobian_det(jp, d, fine.size());
  std::vector<const double*> shift(d), integrands;
  std::vector<std::vector<double>> minus_w(d);
  for (int j = 0; j < d; ++j) {
    shift[j] = w[j].data();
    minus_w[j].resize(w[j].size());
    for (std::size_t p = 0; p < w[j].size(); ++p) minus_w[j][p] = -w[j][p];
  }
  for (int j = 0; j < d; ++j) integrands.push_back(u[j].data());
  for (int j = 0; j < d; ++j) integrands.push_back(minus_w[j].data());
  std::vector<Coeffs> res(2 * d);
  std::vector<Coeffs*> outs;
  for (auto& r : res) outs.push_back(&r);
  detail::SlicePullback(work, fine).run(shift, det.data(), integrands, outs);
  std::vector<FourierField> uf, vf;
  for (int j = 0; j < d; ++j) {
    uf.push_back(spectral::to_field(res[j], work));
    vf.push_back(spectral::to_field(res[d + j], work));
  }
  return {std::move(uf), std::move(vf)};
}

NormalFormState push_forward(const HamiltonianSpec& spec, const NormalFormState& st, NodeField* S_out,
                             StepDiagnostics* diag) {
  const auto& P = spec.params;
  const int d = spec.d;
  const Grid work = st.R.grid;
  const Grid fine = work.refined(P.oversample, P.oversample);
  const double epsa = std::pow(spec.eps, -spec.a);
  const ActionBox& ob = st.R.box;
  ActionBox nb(ob.center(), P.tau(st.j + 1), P.nodes);

  NodeField Rn = st.R.interpolate(nb);
  double min_div = 0.0;
  NodeField S = solve_homological(Rn, spec.H0, spec.eps, spec.a, st.K, spec.dc, &min_div);
  std::vector<NodeField> Srho(d);
  for (int j = 0; j < d; ++j) Srho[j] = S.derive_action(j);

  NormalFormState out;
  out.j = st.j + 1;
  out.s = P.s(out.j);
  out.tau = nb.radius();
  out.K = P.K(out.j, spec.eps, work.max_order());
  out.R = NodeField(work, nb);
  out.R_plus = NodeField(work, nb);
  out.h = st.h.interpolate(nb);
  out.h += Rn.angle_mean();

  const int on = ob.node_count();
  const std::size_t np = fine.size();
  const int ntf = fine.n_time;
  auto Rv = detail::fine_values(st.R, fine);
  const bool has_plus = !all_zero(st.R_plus);
  std::vector<double> Rpv;
  if (has_plus) Rpv = detail::fine_values(st.R_plus, fine);
  auto hv = detail::fine_time_values(st.h, ntf);
  const double half_tau = 0.5 * st.tau;
  detail::SlicePullback pull(work, fine);

  std::vector<double> contraction(nb.node_count(), 0.0), shift_ratio(nb.node_count(), 0.0);
  parallel_for(nb.node_count(), [&](std::size_t nidx) {
    const int n = static_cast<int>(nidx);
    auto rho = nb.node(n);
    Coeffs S0 = S.at[n];
    std::vector<std::vector<double>> u(d), w(d), jac(d * d);
    for (int j = 0; j < d; ++j) {
      u[j] = detail::fine_values(spectral::derive_angle(S0, work, j), work, fine);
      w[j] = detail::fine_values(Srho[j].at[n], work, fine);
      for (int i = 0; i < d; ++i)
        jac[j * d + i] = detail::fine_values(spectral::derive_angle(Srho[j].at[n], work, i), work, fine);
    }
    std::vector<const double*> jp(d * d);
    for (int i = 0; i < d * d; ++i) jp[i] = jac[i].data();
    contraction[n] = detail::max_operator_norm(jp, d, np);
    if (contraction[n] > 0.5)
      throw ContractionFailure("normal form step " + std::to_string(st.j) +
                               ": |d2S/dtheta drho| = " + std::to_string(contraction[n]) + " > 1/2");
    auto det = detail::jacobian_det(jp, d, np);

    std::vector<double> w0(on), wt(on), I(d), x(d);
    ob.fast_weights(rho.data(), w0.data());
    std::vector<double> rs(np), rss(has_plus ? np : 0);
    double worst = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
      const int it = static_cast<int>(p % ntf);
      for (int j = 0; j < d; ++j) {
        x[j] = u[j][p];
        I[j] = rho[j] + x[j];
        worst = std::max(worst, std::abs(x[j]) / half_tau);
      }
      ob.fast_weights(I.data(), wt.data());
      const double* rp = Rv.data() + p * on;
      const double* hp = hv.data() + static_cast<std::size_t>(it) * on;
      double v = epsa * spec.H0.remainder(rho, x, 2);
      v += detail::dot(wt.data(), rp, on) - detail::dot(w0.data(), rp, on);
      v += detail::dot(wt.data(), hp, on) - detail::dot(w0.data(), hp, on);
      rs[p] = v;
      if (has_plus) rss[p] = detail::dot(wt.data(), Rpv.data() + p * on, on);
    }
    shift_ratio[n] = worst;
    if (worst > 1.0)
      throw ContractionFailure("normal form step " + std::to_string(st.j) + ": action shift leaves B(tau_j)");

    std::vector<const double*> shift(d);
    for (int j = 0; j < d; ++j) shift[j] = w[j].data();
    Coeffs a, b;
    if (has_plus)
      pull.run(shift, det.data(), {rs.data(), rss.data()}, {&a, &b});
    else
      pull.run(shift, det.data(), {rs.data()}, {&a});
    Coeffs rest;
    spectral::truncate_order(a, work, out.K, &rest);
    if (has_plus)
      for (std::size_t i = 0; i < rest.size(); ++i) rest[i] += b[i];
    out.R.at[n] = std::move(a);
    out.R_plus.at[n] = std::move(rest);
  });

  if (diag) {
    *diag = diagnostics(out);
    diag->min_divisor = min_div;
    diag->contraction = *std::max_element(contraction.begin(), contraction.end());
    diag->max_shift = *std::max_element(shift_ratio.begin(), shift_ratio.end());
    double prev = st.R.norm(st.s, true);
    diag->decay = prev > 0 ? diag->norm_R / prev : 0.0;
  }
  if (S_out) *S_out = std::move(S);
  return out;
}

NormalFormRun run_normal_form(const HamiltonianSpec& spec, bool keep_states) {
  spec.validate();
  NormalFormRun run;
  NormalFormState st = split_tail(spec);
  run.log.push_back(diagnostics(st));
  if (keep_states) run.states.push_back(st);
  for (int j = 0; j < spec.params.steps; ++j) {
    NodeField S;
    StepDiagnostics dg;
    st = push_forward(spec, st, &S, &dg);
    // Divisor and contraction figures describe the step that produced st.
    run.log.push_back(dg);
    run.changes.push_back(std::move(S));
    if (keep_states) run.states.push_back(st);
  }
  if (!keep_states) run.states.push_back(std::move(st));
  return run;
}

double TimeAveraged::value(const HamiltonianSpec& spec, std::span<const double> phi, double t,
                           std::span<const double> J) const {
  return std::pow(spec.eps, -spec.a) * spec.H0.value(J) + h_avg.evaluate(phi, t, J) + R_breve.evaluate(phi, t, J);
}

TimeAveraged time_average(const HamiltonianSpec& spec, const NormalFormState& last) {
  const Grid work = last.R.grid;
  const int d = work.d;
  const ActionBox& box = last.R.box;
  TimeAveraged ta;
  ta.h_avg = NodeField(work, box);
  ta.S_tilde = NodeField(work, box);
  ta.R_breve = NodeField(work, box);
  const std::vector<double> zero(d, 0.0);
  for (int n = 0; n < box.node_count(); ++n) {
    Coeffs hc = spectral::angle_mean(last.h.at[n], work);
    ta.h_avg.at[n][0] = complex(hc[0].real(), 0.0);
    ta.S_tilde.at[n] = spectral::solve_cohomological(hc, work, zero, work.max_order(), true);
  }
  const int ntf = work.n_time * spec.params.oversample;
  std::vector<std::vector<double>> delta(d);
  for (int j = 0; j < d; ++j) delta[j] = detail::fine_time_values(ta.S_tilde.derive_action(j), ntf);
  const Grid mixed{d, work.n_angle, ntf};
  const int on = box.node_count();
  parallel_for(on, [&](std::size_t nidx) {
    const int n = static_cast<int>(nidx);
    Coeffs r = last.R.at[n];
    if (!last.R_plus.at.empty())
      for (std::size_t i = 0; i < r.size(); ++i) r[i] += last.R_plus.at[n][i];
    auto v = spectral::resample(r, work, mixed);
    spectral::time_to_values_inplace(v, mixed);
    int k[16];
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == complex(0.0)) continue;
      const int it = static_cast<int>(i % ntf);
      spectral::decode(mixed, i, k);
      double ph = 0.0;
      for (int j = 0; j < d; ++j) ph += k[j] * delta[j][static_cast<std::size_t>(it) * on + n];
      v[i] *= std::polar(1.0, -ph);
    }
    spectral::time_to_coeffs_inplace(v, mixed);
    auto c = spectral::resample(v, mixed, work);
    spectral::symmetrize(c, work);
    ta.R_breve.at[n] = std::move(c);
  });
  return ta;
}

std::vector<double> locate_expansion_point(const HamiltonianSpec& spec, const NodeField& h_avg, double* residual,
                                           int max_iter) {
  const int d = spec.d;
  const double epsa = std::pow(spec.eps, -spec.a);
  auto target = spec.frequency(spec.I0);
  double tnorm = 0.0;
  for (double v : target) tnorm = std::max(tnorm, std::abs(v));
  const double tol = 1e-12 * std::max(1.0, tnorm);
  std::vector<double> I = spec.I0;
  double res = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= max_iter; ++it) {
    auto g = spec.H0.gradient(I);
    Eigen::VectorXd F(d);
    for (int j = 0; j < d; ++j) F(j) = epsa * g[j] + mean_value(h_avg, I, unit(d, j)) - target[j];
    res = F.cwiseAbs().maxCoeff();
    if (res <= tol || it == max_iter) break;
    auto H = spec.H0.hessian(I);
    Eigen::MatrixXd M(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        std::vector<int> o(d, 0);
        ++o[i];
        ++o[j];
        M(i, j) = epsa * H[i * d + j] + mean_value(h_avg, I, o);
      }
    Eigen::VectorXd step = M.partialPivLu().solve(F);
    for (int j = 0; j < d; ++j) I[j] -= step(j);
  }
  if (residual) *residual = res;
  if (!(res <= tol)) throw std::runtime_error("locate_expansion_point: Newton did not converge");
  return I;
}

double ActionJet::value(std::span<const double> theta, double t, std::span<const double> rho) const {
  const int d = grid.d;
  double v = spectral::evaluate(r0, grid, theta, t);
  for (int i = 0; i < d; ++i) {
    v += rho[i] * spectral::evaluate(r1[i], grid, theta, t);
    for (int j = 0; j < d; ++j) v += rho[i] * rho[j] * spectral::evaluate(r2[i * d + j], grid, theta, t);
  }
  return v;
}

ActionJet action_jet(const NodeField& P, std::span<const double> at) {
  const int d = P.grid.d;
  ActionJet jet;
  jet.grid = P.grid;
  jet.r0 = P.combine(P.box.weights(at));
  jet.r1.resize(d);
  jet.r2.resize(d * d);
  for (int i = 0; i < d; ++i) jet.r1[i] = P.combine(P.box.weights(at, unit(d, i)));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      std::vector<int> o(d, 0);
      ++o[i];
      ++o[j];
      auto c = P.combine(P.box.weights(at, o));
      for (auto& v : c) v *= 0.5;
      jet.r2[i * d + j] = c;
      jet.r2[j * d + i] = std::move(c);
    }
  return jet;
}

std::vector<double> AveragedForm::frequency() const {
  std::vector<double> f = omega;
  for (double& v : f) v *= std::pow(eps, -a);
  return f;
}

double AveragedForm::N(std::span<const double> rho) const {
  double v = 0.0;
  for (int i = 0; i < d; ++i) {
    v += omega[i] * rho[i];
    for (int j = 0; j < d; ++j) v += Omega[i * d + j] * rho[i] * rho[j];
  }
  return std::pow(eps, -a) * v;
}

double AveragedForm::Q(std::span<const double> rho) const {
  double v = std::pow(eps, -a) * H0.remainder(I_star, rho, 3);
  if (hbar.empty()) return v;
  double I[3], w[64];
  for (int j = 0; j < d; ++j) I[j] = I_star[j] + rho[j];
  hbar_box.fast_weights(I, w);
  // Cubic remainder of [h] at I_*.
  double r = detail::dot(w, hbar.data(), static_cast<int>(hbar.size())) - hbar0;
  for (int i = 0; i < d; ++i) {
    r -= hbar1[i] * rho[i];
    for (int j = 0; j < d; ++j) r -= 0.5 * hbar2[i * d + j] * rho[i] * rho[j];
  }
  return v + r;
}

std::vector<double> AveragedForm::Q3() const {
  auto t = H0.third(I_star);
  for (double& v : t) v *= std::pow(eps, -a);
  if (!hbar.empty())
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += hbar3[i];
  return t;
}

double AveragedForm::value(std::span<const double> theta, double t, std::span<const double> rho) const {
  return N(rho) + Q(rho) + P.evaluate(theta, t, rho);
}

AveragedForm taylor_split(const HamiltonianSpec& spec, std::span<const double> I_star, const TimeAveraged& ta,
                          double r0, int nodes) {
  const int d = spec.d;
  const double epsa = std::pow(spec.eps, -spec.a);
  AveragedForm F;
  F.d = d;
  F.eps = spec.eps;
  F.a = spec.a;
  F.I_star.assign(I_star.begin(), I_star.end());
  F.omega = spec.H0.gradient(spec.I0);
  F.H0 = spec.H0;
  if (d > 3 || ta.h_avg.node_count() > 64) throw std::invalid_argument("taylor_split: box too large");
  if (!all_zero(ta.h_avg)) {
    F.hbar_box = ta.h_avg.box;
    for (const auto& c : ta.h_avg.at) F.hbar.push_back(c[0].real());
    F.hbar0 = mean_value(ta.h_avg, I_star);
    F.hbar1.resize(d);
    F.hbar2.resize(d * d);
    F.hbar3.resize(d * d * d);
    for (int i = 0; i < d; ++i) {
      F.hbar1[i] = mean_value(ta.h_avg, I_star, unit(d, i));
      for (int j = 0; j < d; ++j) {
        std::vector<int> o(d, 0);
        ++o[i];
        ++o[j];
        F.hbar2[i * d + j] = mean_value(ta.h_avg, I_star, o);
        for (int k = 0; k < d; ++k) {
          auto o3 = o;
          ++o3[k];
          F.hbar3[(i * d + j) * d + k] = mean_value(ta.h_avg, I_star, o3);
        }
      }
    }
  }
  auto H = spec.H0.hessian(I_star);
  F.Omega.resize(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      std::vector<int> o(d, 0);
      ++o[i];
      ++o[j];
      F.Omega[i * d + j] = 0.5 * (H[i * d + j] + mean_value(ta.h_avg, I_star, o) / epsa);
    }
  // Linear mismatch left by Newton, folded into P.
  auto g = spec.H0.gradient(I_star);
  std::vector<double> lin(d);
  for (int j = 0; j < d; ++j) lin[j] = epsa * g[j] + mean_value(ta.h_avg, I_star, unit(d, j)) - epsa * F.omega[j];

  ActionBox box(std::vector<double>(d, 0.0), r0, nodes);
  F.P = NodeField(ta.R_breve.grid, box);
  for (int n = 0; n < box.node_count(); ++n) {
    auto rho = box.node(n);
    std::vector<double> I(d);
    double c = 0.0;
    for (int j = 0; j < d; ++j) {
      I[j] = I_star[j] + rho[j];
      c += lin[j] * rho[j];
    }
    F.P.at[n] = ta.R_breve.at_action(I);
    F.P.at[n][0] += c;
  }
  F.low = action_jet(F.P, std::vector<double>(d, 0.0));

  // sup |R_high| / |rho|^3 over corner and axis directions, bounded by l1 sums.
  auto sample = [&](double r) {
    double worst = 0.0;
    const int ndir = static_cast<int>(std::pow(3, d));
    for (int q = 1; q < ndir; ++q) {
      std::vector<double> rho(d);
      int rem = q;
      double nrm = 0.0;
      for (int j = 0; j < d; ++j) {
        rho[j] = r * ((rem % 3) - 1);
        rem /= 3;
        nrm = std::max(nrm, std::abs(rho[j]));
      }
      if (nrm == 0.0) continue;
      Coeffs c = F.P.at_action(rho);
      for (std::size_t i = 0; i < c.size(); ++i) {
        complex jv = F.low.r0[i];
        for (int a2 = 0; a2 < d; ++a2) {
          jv += rho[a2] * F.low.r1[a2][i];
          for (int b2 = 0; b2 < d; ++b2) jv += rho[a2] * rho[b2] * F.low.r2[a2 * d + b2][i];
        }
        c[i] -= jv;
      }
      c[0] += F.Q(rho);
      worst = std::max(worst, spectral::weighted_norm(c, F.P.grid, 0.0) / (nrm * nrm * nrm));
    }
    return worst;
  };
  F.cubic_bound = sample(0.5 * r0);
  F.cubic_bound_half = sample(0.25 * r0);
  F.E = NormalFormParams::theory_A(d, spec.a, spec.b) - 9.0 * spec.b - 1.0;
  return F;
}

}  // namespace kamforge
