#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "commands.hpp"
#include "kamforge/errors.hpp"
#include "kamforge/io.hpp"

namespace {

using kamforge::io::format_double;

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps, amplitude, gamma, horizon;
};

kamforge::cli::ExperimentConfig load(const Overrides& o) {
  if (o.config.empty()) throw CLI::RequiredError("--config");
  auto cfg = kamforge::cli::load_config(o.config);
  if (o.out) cfg.out = *o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.eps) cfg.A_tilde = 1.0 / *o.eps;
  if (o.amplitude) cfg.A_tilde = *o.amplitude;
  if (o.gamma) cfg.dc.gamma = *o.gamma;
  if (o.horizon) cfg.horizon = *o.horizon;
  cfg.validate();
  return cfg;
}

void print_vec(const char* name, const std::vector<double>& v) {
  std::printf("%s", name);
  for (double x : v) std::printf(" %s", format_double(x).c_str());
  std::printf("\n");
}

int run(int argc, char** argv) {
  CLI::App app{"kamforge: quasi-periodic tori of forced Duffing networks"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config, "experiment configuration (JSON)");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--seed", o.seed, "random seed");
  auto* eps = app.add_option("--eps", o.eps, "perturbation size, eps = 1/A");
  auto* amp = app.add_option("--amplitude", o.amplitude, "amplitude scale A");
  eps->excludes(amp);
  app.add_option("--gamma", o.gamma, "Diophantine constant");
  app.add_option("--horizon", o.horizon, "integration horizon for verify");

  int n = 1;
  auto* period = app.add_subcommand("period", "minimal period of x'' + x^(2n+1) = 0 through (1, 0)");
  period->add_option("n", n, "stiffness exponent")->check(CLI::NonNegativeNumber);
  auto* scan = app.add_subcommand("dc-scan", "Diophantine margin map over the action box");
  auto* pipeline = app.add_subcommand("pipeline", "normal form, KAM iteration and torus extraction");
  std::string torus_path;
  auto* verify = app.add_subcommand("verify", "invariance defect and long orbit of a stored torus");
  verify->add_option("--torus", torus_path, "torus file (default: <out>/torus.json)");
  auto* measure = app.add_subcommand("measure", "excluded-frequency fraction against gamma");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*period) {
    std::printf("T0 = %s\n", format_double(kamforge::cli::cmd_period(n)).c_str());
    return 0;
  }
  auto cfg = load(o);
  if (*scan) {
    auto r = kamforge::cli::cmd_dc_scan(cfg);
    print_vec("best I0", r.point.I0);
    std::printf("margin %s pass %d\nwrote %s\n", format_double(r.point.report.margin).c_str(), r.point.report.pass,
                r.csv.c_str());
    return r.point.report.pass ? 0 : 2;
  }
  if (*measure) {
    for (const auto& e : kamforge::cli::cmd_measure(cfg))
      std::printf("gamma %s excluded %s [%s, %s]\n", format_double(e.gamma).c_str(), format_double(e.fraction).c_str(),
                  format_double(e.lo).c_str(), format_double(e.hi).c_str());
    return 0;
  }
  if (*pipeline) {
    auto r = kamforge::cli::cmd_pipeline(cfg);
    print_vec("I0", r.I0);
    print_vec("frequency", r.torus.frequency);
    std::printf("normal form steps %zu, final |R| %s\n", r.normal_form.size() - 1,
                format_double(r.normal_form.back().norm_R).c_str());
    std::printf("KAM steps %zu, e %s, converged %d\n", r.kam.size() - 1, format_double(r.kam.back().e).c_str(),
                r.kam_converged);
    std::printf("invariance defect over T = %s: max %s mean %s\n", format_double(cfg.T_check).c_str(),
                format_double(r.defect.max_defect).c_str(), format_double(r.defect.mean_defect).c_str());
    for (const auto& f : r.files) std::printf("wrote %s\n", f.c_str());
    return r.defect.escaped ? 4 : 0;
  }
  if (*verify) {
    if (torus_path.empty()) torus_path = (std::filesystem::path(cfg.out) / "torus.json").string();
    auto r = kamforge::cli::cmd_verify(cfg, torus_path);
    std::printf("invariance defect over T = %s: max %s\n", format_double(cfg.T_check).c_str(),
                format_double(r.defect.max_defect).c_str());
    std::printf("action variation over T = %s: %s\n", format_double(cfg.horizon).c_str(),
                format_double(r.stability.action_variation).c_str());
    print_vec("rotation", r.rotation);
    print_vec("target", r.target);
    std::printf("rotation error %s\n", format_double(r.rotation_error).c_str());
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const kamforge::DcFailure& e) {
    std::fprintf(stderr, "DC failure: %s\n", e.what());
    return 2;
  } catch (const kamforge::ContractionFailure& e) {
    std::fprintf(stderr, "contraction failure: %s\n", e.what());
    return 3;
  } catch (const kamforge::EscapeError& e) {
    std::fprintf(stderr, "escape: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
