#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <stdexcept>

#include "kamforge/io.hpp"
#include "kamforge/oscillator.hpp"

namespace kamforge::cli {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<std::string> indexed(const std::string& stem, int d) {
  std::vector<std::string> out;
  for (int j = 1; j <= d; ++j) out.push_back(stem + std::to_string(j));
  return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out);
  return (std::filesystem::path(cfg.out) / name).string();
}

// Progress goes to stderr so stdout stays clean for scripting.
class Clock {
 public:
  void mark(const char* what) {
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    std::fprintf(stderr, "[%8.2fs] %s\n", s, what);
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

FrequencyMap frequency_map(const ActionAngleMap& map) {
  auto H0 = duffing_h0(map);
  return [H0](std::span<const double> I) {
    std::vector<double> J(I.begin(), I.end());
    for (double& x : J) x /= kTwoPi;
    return H0.gradient(J);
  };
}

DiophantineParams scaled_dc(const ExperimentConfig& cfg) {
  DiophantineParams p = cfg.dc;
  p.eps = 1.0 / cfg.A_tilde;
  p.a = cfg.network.n;
  return p;
}

}  // namespace

double cmd_period(int n) { return compute_period(n); }

DcScanResult cmd_dc_scan(const ExperimentConfig& cfg) {
  const int d = cfg.d();
  ActionAngleMap map(cfg.network.n, d);
  DcScanResult r;
  r.point = find_dc_point(frequency_map(map), cfg.box_lo, cfg.box_hi, scaled_dc(cfg), cfg.scan_n);
  r.csv = out_path(cfg, "dc_scan.csv");
  io::CsvWriter csv(r.csv, cfg.hash(), concat(indexed("I_", d), {"margin", "pass"}));
  for (const auto& s : r.point.map) {
    std::vector<double> row = s.I;
    row.push_back(s.margin);
    row.push_back(s.pass ? 1.0 : 0.0);
    csv.row(row);
  }
  return r;
}

std::vector<MeasureEstimate> cmd_measure(const ExperimentConfig& cfg) {
  auto est = excluded_measure_sweep(scaled_dc(cfg), cfg.gammas, cfg.measure_lo, cfg.measure_hi, cfg.measure_samples,
                                    cfg.seed);
  io::CsvWriter csv(out_path(cfg, "measure.csv"), cfg.hash(),
                    {"gamma", "fraction", "wilson_lo", "wilson_hi", "samples", "excluded"});
  for (const auto& e : est)
    csv.row({e.gamma, e.fraction, e.lo, e.hi, static_cast<double>(e.samples), static_cast<double>(e.excluded)});
  return est;
}

PipelineResult cmd_pipeline(const ExperimentConfig& cfg) {
  cfg.validate();
  const int d = cfg.d();
  const std::string hash = cfg.hash();
  Clock clock;
  PipelineResult res;
  ScaledSystem sys{cfg.network, cfg.A_tilde};
  ActionAngleMap map(cfg.network.n, d);
  const DiophantineParams dc = scaled_dc(cfg);

  if (cfg.I0) {
    res.I0 = *cfg.I0;
    auto omega = frequency_map(map)(res.I0);
    auto rep = check_dc(omega, dc);
    if (!rep.pass)
      throw DcFailure("pipeline: I0 fails the Diophantine condition (margin " + io::format_double(rep.margin) + ")",
                      rep.k, rep.l, rep.divisor, rep.divisor / std::max(rep.margin, 1e-300));
  } else {
    auto pt = find_dc_point(frequency_map(map), cfg.box_lo, cfg.box_hi, dc, cfg.scan_n);
    if (!pt.report.pass) throw DcFailure("pipeline: no Diophantine point in the action box", pt.report.k, pt.report.l,
                                         pt.report.divisor, 0.0);
    res.I0 = pt.I0;
  }
  clock.mark("expansion point fixed");

  double alias = 0.0;
  auto spec = to_hamiltonian_spec(sys, map, res.I0, cfg.box_lo, cfg.box_hi, cfg.normal_form, dc, &alias);
  clock.mark("Hamiltonian sampled");
  auto nf = run_normal_form(spec, false);
  res.normal_form = nf.log;
  clock.mark("normal form done");
  {
    io::CsvWriter csv(out_path(cfg, "normal_form.csv"), hash,
                      {"j", "norm_h", "norm_R", "norm_R_plus", "K", "s", "tau", "decay", "min_divisor", "contraction"});
    for (const auto& g : nf.log)
      csv.row({double(g.j), g.norm_h, g.norm_R, g.norm_R_plus, double(g.K), g.s, g.tau, g.decay, g.min_divisor,
               g.contraction});
    res.files.push_back(csv.path());
  }

  auto ta = time_average(spec, nf.final_state());
  double residual = 0.0;
  res.I_star = locate_expansion_point(spec, ta.h_avg, &residual);
  auto F = taylor_split(spec, res.I_star, ta, cfg.kam_radius * nf.final_state().tau, cfg.kam.nodes);
  clock.mark("averaged form ready");
  auto kr = kam_iterate(F, cfg.kam, spec.dc, false);
  res.kam = kr.log;
  res.kam_converged = kr.converged;
  clock.mark("KAM done");
  {
    io::CsvWriter csv(out_path(cfg, "kam.csv"), hash,
                      {"m", "norm_R0", "norm_R1", "norm_R2", "nu", "dOmega", "e", "radius", "min_divisor",
                       "contraction"});
    for (const auto& l : kr.log)
      csv.row({double(l.m), l.norm_R0, l.norm_R1, l.norm_R2, l.nu, l.dOmega, l.e, l.radius, l.min_divisor,
               l.contraction});
    res.files.push_back(csv.path());
  }

  res.torus = extract_torus(spec, sys, nf, ta, F, kr, cfg.torus, &res.torus_report);
  clock.mark("torus extracted");
  {
    std::string p = out_path(cfg, "torus.json");
    io::write_file(p, to_json(res.torus));
    res.files.push_back(p);
  }
  res.defect = invariance_defect(res.torus, sys, map, cfg.T_check, cfg.defect_samples, cfg.seed);
  clock.mark("invariance defect measured");

  {
    std::vector<std::string> head = concat(indexed("I0_", d), indexed("Istar_", d));
    head = concat(head, indexed("frequency_", d));
    head = concat(head, {"alias_mass", "locate_residual", "cubic_bound", "cubic_bound_half", "kam_steps",
                         "kam_converged", "e_final", "fixed_point_iterations", "max_excursion", "max_reparam",
                         "T_check", "defect_max", "defect_mean", "escaped"});
    std::vector<double> row = res.I0;
    for (double x : res.I_star) row.push_back(kTwoPi * x);
    for (double w : res.torus.frequency) row.push_back(w);
    row.insert(row.end(), {alias, residual, F.cubic_bound, F.cubic_bound_half, double(kr.changes.size()),
                           kr.converged ? 1.0 : 0.0, kr.final_state().e, double(res.torus_report.max_iterations),
                           res.torus_report.max_excursion, res.torus_report.max_reparam, cfg.T_check,
                           res.defect.max_defect, res.defect.mean_defect, double(res.defect.escaped)});
    io::CsvWriter csv(out_path(cfg, "summary.csv"), hash, head);
    csv.row(row);
    res.files.push_back(csv.path());
  }
  return res;
}

VerifyResult cmd_verify(const ExperimentConfig& cfg, const std::string& torus_path) {
  const int d = cfg.d();
  const std::string hash = cfg.hash();
  auto torus = torus_from_json(io::read_file(torus_path));
  if (torus.d != d || torus.n != cfg.network.n) throw std::invalid_argument("verify: torus does not match the network");
  ScaledSystem sys{cfg.network, torus.A_tilde};
  ActionAngleMap map(cfg.network.n, d);
  VerifyResult r;
  r.defect = invariance_defect(torus, sys, map, cfg.T_check, cfg.defect_samples, cfg.seed);

  std::vector<double> phi0(d, 0.0);
  auto [x0, v0] = torus.state(map, phi0, 0.0);
  double amp = 0.0;
  for (double x : x0) amp = std::max(amp, std::abs(x));
  const double h0 = default_step(cfg.network.n, 2.0 * amp);
  const int per = std::max(1, static_cast<int>(std::ceil(cfg.orbit_dt / h0)));
  const double h = cfg.orbit_dt / per;
  const double T = cfg.orbit_dt * std::round(cfg.horizon / cfg.orbit_dt);
  auto traj = integrate(cfg.network, x0, v0, T, h, per);
  r.stability = stability_metrics(traj, cfg.network.n);
  r.target = torus.frequency;
  if (!traj.escaped) {
    r.rotation = rotation_vector(traj, map, torus.A_tilde);
    for (int j = 0; j < d; ++j) r.rotation_error = std::max(r.rotation_error, std::abs(r.rotation[j] / r.target[j] - 1));
  } else {
    r.rotation.assign(d, std::nan(""));
    r.rotation_error = std::numeric_limits<double>::infinity();
  }

  {
    io::CsvWriter csv(out_path(cfg, "orbit.csv"), hash, concat(concat({"t"}, indexed("x_", d)), indexed("v_", d)));
    for (std::size_t i = 0; i < traj.size(); i += cfg.orbit_every) {
      std::vector<double> row{traj.t[i]};
      for (int j = 0; j < d; ++j) row.push_back(traj.x[i * d + j]);
      for (int j = 0; j < d; ++j) row.push_back(traj.v[i * d + j]);
      csv.row(row);
    }
  }
  {
    auto head = concat({"T_check", "defect_max", "defect_mean", "escaped", "horizon", "sup_norm", "action_variation",
                        "orbit_escaped"},
                       concat(indexed("rotation_", d), indexed("target_", d)));
    head.push_back("rotation_error");
    std::vector<double> row{cfg.T_check,
                            r.defect.max_defect,
                            r.defect.mean_defect,
                            double(r.defect.escaped),
                            T,
                            r.stability.sup_norm,
                            r.stability.action_variation,
                            traj.escaped ? 1.0 : 0.0};
    row.insert(row.end(), r.rotation.begin(), r.rotation.end());
    row.insert(row.end(), r.target.begin(), r.target.end());
    row.push_back(r.rotation_error);
    io::CsvWriter csv(out_path(cfg, "verify.csv"), hash, head);
    csv.row(row);
  }
  if (traj.escaped || r.defect.escaped) throw EscapeError("verify: orbit escaped");
  return r;
}

}  // namespace kamforge::cli
