#include "kamforge/kam.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "compose.hpp"
#include "kamforge/parallel.hpp"

namespace kamforge {

namespace {

using spectral::Coeffs;
using spectral::Grid;

// Weighted norm without the (0, 0) mode.
double norm_no_constant(const Coeffs& c, const Grid& g, double s) {
  return spectral::weighted_norm(c, g, s) - std::abs(c[0]);
}

void axpy(Coeffs& y, complex a, const Coeffs& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

// Product of two real series on the oversampled grid, returned on `work`.
Coeffs product(const Coeffs& f, const Coeffs& g, const Grid& work, const Grid& fine) {
  auto a = detail::fine_values(f, work, fine);
  auto b = detail::fine_values(g, work, fine);
  Coeffs v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i] * b[i];
  spectral::to_coeffs_inplace(v, fine);
  auto c = spectral::resample(v, fine, work);
  spectral::symmetrize(c, work);
  return c;
}

std::vector<double> origin(int d) { return std::vector<double>(d, 0.0); }

}  // namespace

double KamState::value(const AveragedForm& F, std::span<const double> theta, double t,
                       std::span<const double> rho) const {
  const int d = F.d;
  double n = 0.0;
  for (int i = 0; i < d; ++i) {
    n += F.omega[i] * rho[i];
    for (int j = 0; j < d; ++j) n += Omega[i * d + j] * rho[i] * rho[j];
  }
  return std::pow(F.eps, -F.a) * n + F.Q(rho) + P.evaluate(theta, t, rho);
}

PointChange KamChange::apply(std::span<const double> phi, double t, std::span<const double> rho) const {
  const int d = grid.d;
  std::vector<Coeffs> shift(d);
  Coeffs S = S0;
  for (int i = 0; i < d; ++i) {
    shift[i] = S1[i];
    axpy(S, rho[i], S1[i]);
    for (int k = 0; k < d; ++k) {
      axpy(shift[i], 2.0 * rho[k], S2[i * d + k]);
      axpy(S, rho[i] * rho[k], S2[i * d + k]);
    }
  }
  PointChange out;
  out.theta.assign(phi.begin(), phi.end());
  std::vector<double> next(d);
  for (int it = 1;; ++it) {
    double diff = 0.0;
    for (int j = 0; j < d; ++j) {
      next[j] = phi[j] - spectral::evaluate(shift[j], grid, out.theta, t);
      diff = std::max(diff, std::abs(next[j] - out.theta[j]));
    }
    out.theta = next;
    out.iterations = it;
    if (diff <= 1e-15 * (1.0 + std::abs(phi[0]))) break;
    if (it >= 200) throw ContractionFailure("KAM change: fixed point did not converge");
  }
  out.I.resize(d);
  for (int j = 0; j < d; ++j)
    out.I[j] = nu[j] + rho[j] + spectral::evaluate(spectral::derive_angle(S, grid, j), grid, out.theta, t);
  out.dS_dt = spectral::evaluate(spectral::derive_time(S, grid), grid, out.theta, t);
  return out;
}

double KamChange::dropped_constant(const AveragedForm& F, std::span<const double> Omega) const {
  const int d = F.d;
  double c = 0.0;
  for (int i = 0; i < d; ++i) {
    c += F.omega[i] * nu[i];
    for (int j = 0; j < d; ++j) c += Omega[i * d + j] * nu[i] * nu[j];
  }
  return std::pow(F.eps, -F.a) * c;
}

void kam_measure(KamState& st, const KamParams& kp) {
  const int d = st.P.grid.d;
  const Grid& g = st.P.grid;
  st.low = action_jet(st.P, origin(d));
  st.norm_R0 = norm_no_constant(st.low.r0, g, kp.s);
  st.norm_R1 = 0.0;
  st.norm_R2 = 0.0;
  for (const auto& c : st.low.r1) st.norm_R1 = std::max(st.norm_R1, spectral::weighted_norm(c, g, kp.s));
  for (const auto& c : st.low.r2) st.norm_R2 = std::max(st.norm_R2, spectral::weighted_norm(c, g, kp.s));
  st.e = std::max({st.norm_R0, st.norm_R1, st.norm_R2});
}

KamState kam_initial_state(const AveragedForm& F, const KamParams& kp) {
  KamState st;
  st.m = 0;
  st.Omega = F.Omega;
  st.P = F.P;
  kam_measure(st, kp);
  return st;
}

KamState kam_step(const AveragedForm& F, const KamState& st, const KamParams& kp, const DiophantineParams& dc,
                  KamChange* change, KamStepLog* log) {
  const int d = F.d;
  const Grid work = st.P.grid;
  const Grid fine = work.refined(kp.oversample, kp.oversample);
  const double epsa = std::pow(F.eps, -F.a);
  const auto freq = F.frequency();
  const int K = work.max_order();
  DiophantineParams dcp = dc;
  dcp.eps = F.eps;
  dcp.a = F.a;
  const auto& Om = st.Omega;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> OmM(Om.data(), d, d);

  KamChange ch;
  ch.grid = work;
  double min_div = std::numeric_limits<double>::infinity();
  auto solve = [&](const Coeffs& r) {
    check_divisors(r, work, freq, dcp, true, false);
    spectral::DivisorReport rep;
    auto s = spectral::solve_cohomological(r, work, freq, K, true, &rep);
    min_div = std::min(min_div, rep.min_divisor);
    return s;
  };

  // Constant-in-rho part.
  ch.R0 = st.low.r0;
  ch.S0 = solve(ch.R0);
  std::vector<Coeffs> dS0(d);
  for (int j = 0; j < d; ++j) dS0[j] = spectral::derive_angle(ch.S0, work, j);

  // Linear part and the action shift nu.
  ch.R_star.resize(d);
  Eigen::VectorXd mean(d);
  for (int i = 0; i < d; ++i) {
    ch.R_star[i] = st.low.r1[i];
    for (int j = 0; j < d; ++j) axpy(ch.R_star[i], 2.0 * epsa * Om[i * d + j], dS0[j]);
    mean(i) = ch.R_star[i][0].real();
  }
  Eigen::VectorXd nu = -(2.0 * epsa * OmM).partialPivLu().solve(mean);
  ch.nu.assign(nu.data(), nu.data() + d);
  ch.S1.resize(d);
  for (int i = 0; i < d; ++i) ch.S1[i] = solve(ch.R_star[i]);
  // D[j][i] = d_theta_j S1_i
  std::vector<std::vector<Coeffs>> D(d, std::vector<Coeffs>(d));
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) D[j][i] = spectral::derive_angle(ch.S1[i], work, j);

  // Quadratic part: 1/2 T[w] + eps^{-a}(Omega D + D^T Omega) + R2 with w = d_theta S0 + nu.
  std::vector<Coeffs> w(d);
  for (int k = 0; k < d; ++k) {
    w[k] = dS0[k];
    w[k][0] += ch.nu[k];
  }
  const auto q3 = F.Q3();
  ch.R_2star.assign(d * d, Coeffs());
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      Coeffs r = st.low.r2[i * d + j];
      for (int l = 0; l < d; ++l) {
        axpy(r, epsa * Om[i * d + l], D[l][j]);
        axpy(r, epsa * Om[l * d + j], D[l][i]);
      }
      for (int k = 0; k < d; ++k) {
        axpy(r, 0.5 * q3[(i * d + j) * d + k], w[k]);
        std::vector<int> o(d, 0);
        ++o[i];
        ++o[j];
        ++o[k];
        Coeffs p3 = st.P.combine(st.P.box.weights(origin(d), o));
        axpy(r, 0.5, product(p3, w[k], work, fine));
      }
      spectral::symmetrize(r, work);
      ch.R_2star[j * d + i] = r;
      ch.R_2star[i * d + j] = std::move(r);
    }
  ch.S2.assign(d * d, Coeffs());
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      ch.S2[i * d + j] = solve(ch.R_2star[i * d + j]);
      ch.S2[j * d + i] = ch.S2[i * d + j];
    }

  KamState out;
  out.m = st.m + 1;
  out.Omega = Om;
  double dOmega = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double delta = std::pow(F.eps, F.a) * 0.5 * (ch.R_2star[i * d + j][0].real() + ch.R_2star[j * d + i][0].real());
      out.Omega[i * d + j] += delta;
      dOmega = std::max(dOmega, std::abs(delta));
    }

  // The new box shrinks by twice the largest action shift at rho = 0.
  double shift0 = 0.0;
  for (int j = 0; j < d; ++j) {
    auto v = detail::fine_values(dS0[j], work, fine);
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    shift0 = std::max(shift0, std::abs(ch.nu[j]) + m);
  }
  const ActionBox& ob = st.P.box;
  const double r_new = ob.radius() - 2.0 * shift0;
  if (r_new < 0.5 * ob.radius())
    throw ContractionFailure("KAM step " + std::to_string(st.m) + ": action shift too large for the box");
  ActionBox nb(origin(d), r_new, kp.nodes);
  out.P = NodeField(work, nb);

  // Angle derivatives shared by all nodes.
  std::vector<std::vector<Coeffs>> dS2(d, std::vector<Coeffs>(d * d));  // [j][ik]
  for (int j = 0; j < d; ++j)
    for (int ik = 0; ik < d * d; ++ik) dS2[j][ik] = spectral::derive_angle(ch.S2[ik], work, j);
  Coeffs tS0 = spectral::derive_time(ch.S0, work);
  std::vector<Coeffs> tS1(d), tS2(d * d);
  for (int i = 0; i < d; ++i) tS1[i] = spectral::derive_time(ch.S1[i], work);
  for (int ik = 0; ik < d * d; ++ik) tS2[ik] = spectral::derive_time(ch.S2[ik], work);

  const int on = ob.node_count();
  const std::size_t np = fine.size();
  auto Pv = detail::fine_values(st.P, fine);
  detail::SlicePullback pull(work, fine);
  std::vector<double> contraction(nb.node_count(), 0.0);

  parallel_for(nb.node_count(), [&](std::size_t nidx) {
    const int n = static_cast<int>(nidx);
    auto rho = nb.node(n);
    std::vector<std::vector<double>> wv(d), sv(d), jv(d * d);
    for (int j = 0; j < d; ++j) {
      Coeffs wc = dS0[j], sc = ch.S1[j];
      for (int i = 0; i < d; ++i) {
        axpy(wc, rho[i], D[j][i]);
        axpy(sc, 2.0 * rho[i], ch.S2[j * d + i]);
        for (int k = 0; k < d; ++k) axpy(wc, rho[i] * rho[k], dS2[j][i * d + k]);
      }
      wv[j] = detail::fine_values(wc, work, fine);
      sv[j] = detail::fine_values(sc, work, fine);
      // Entry (j, l) = d shift_j / d theta_l.
      for (int l = 0; l < d; ++l) {
        Coeffs jc = D[l][j];
        for (int k = 0; k < d; ++k) axpy(jc, 2.0 * rho[k], dS2[l][j * d + k]);
        jv[j * d + l] = detail::fine_values(jc, work, fine);
      }
    }
    Coeffs tc = tS0;
    for (int i = 0; i < d; ++i) {
      axpy(tc, rho[i], tS1[i]);
      for (int k = 0; k < d; ++k) axpy(tc, rho[i] * rho[k], tS2[i * d + k]);
    }
    auto tv = detail::fine_values(tc, work, fine);

    std::vector<const double*> jp(d * d);
    for (int i = 0; i < d * d; ++i) jp[i] = jv[i].data();
    contraction[n] = detail::max_operator_norm(jp, d, np);
    if (contraction[n] > kp.max_contraction)
      throw ContractionFailure("KAM step " + std::to_string(st.m) + ": |d2S/dtheta drho| = " +
                               std::to_string(contraction[n]));
    auto det = detail::jacobian_det(jp, d, np);

    // Fixed quadratic pieces at this node.
    std::vector<double> Om_nu(d, 0.0), Om_rho(d, 0.0);
    double quad_delta = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Om_nu[i] += Om[i * d + j] * ch.nu[j];
        Om_rho[i] += Om[i * d + j] * rho[j];
        quad_delta += (Om[i * d + j] - out.Omega[i * d + j]) * rho[i] * rho[j];
      }
    const double Q_rho = F.Q(rho);
    std::vector<double> G(np), wp(d), I(d), wt(on);
    for (std::size_t p = 0; p < np; ++p) {
      for (int j = 0; j < d; ++j) {
        wp[j] = wv[j][p];
        I[j] = ch.nu[j] + rho[j] + wp[j];
      }
      double lin = 0.0;
      for (int i = 0; i < d; ++i) {
        double Ow = 0.0;
        for (int j = 0; j < d; ++j) Ow += Om[i * d + j] * wp[j];
        lin += F.omega[i] * wp[i] + 2.0 * Om_nu[i] * (rho[i] + wp[i]) + 2.0 * Om_rho[i] * wp[i] + Ow * wp[i];
      }
      double v = epsa * (lin + quad_delta) + F.Q(I) - Q_rho + tv[p];
      ob.fast_weights(I.data(), wt.data());
      v += detail::dot(wt.data(), Pv.data() + p * on, on);
      G[p] = v;
    }
    std::vector<const double*> shift(d);
    for (int j = 0; j < d; ++j) shift[j] = sv[j].data();
    pull.run(shift, det.data(), {G.data()}, {&out.P.at[n]});
  });

  kam_measure(out, kp);
  ch.min_divisor = min_div;
  ch.contraction = *std::max_element(contraction.begin(), contraction.end());
  if (log) {
    log->m = out.m;
    log->norm_R0 = out.norm_R0;
    log->norm_R1 = out.norm_R1;
    log->norm_R2 = out.norm_R2;
    log->e = out.e;
    log->radius = r_new;
    double nn = 0.0;
    for (double v : ch.nu) nn = std::max(nn, std::abs(v));
    log->nu = nn;
    log->dOmega = dOmega;
    log->min_divisor = min_div;
    log->contraction = ch.contraction;
  }
  if (change) *change = std::move(ch);
  return out;
}

KamRun kam_iterate(const AveragedForm& F, const KamParams& kp, const DiophantineParams& dc, bool keep_states) {
  KamRun run;
  KamState st = kam_initial_state(F, kp);
  KamStepLog first;
  first.m = 0;
  first.norm_R0 = st.norm_R0;
  first.norm_R1 = st.norm_R1;
  first.norm_R2 = st.norm_R2;
  first.e = st.e;
  first.radius = st.P.box.radius();
  run.log.push_back(first);
  run.states.push_back(st);
  while (st.e > kp.tol && st.m < kp.max_steps) {
    KamChange ch;
    KamStepLog lg;
    KamState next = kam_step(F, st, kp, dc, &ch, &lg);
    run.log.push_back(lg);
    run.changes.push_back(std::move(ch));
    st = std::move(next);
    if (keep_states) run.states.push_back(st);
  }
  if (!keep_states) run.states.push_back(st);
  run.converged = st.e <= kp.tol;
  return run;
}

}  // namespace kamforge
