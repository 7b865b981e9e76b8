#include "config.hpp"

#include <nlohmann/json.hpp>
#include <stdexcept>

#include "kamforge/io.hpp"

namespace kamforge::cli {

namespace {

using json = nlohmann::json;

template <class T>
void take(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto dd = static_cast<std::size_t>(d());
  if (!(A_tilde > 1.0)) throw std::invalid_argument("config: A_tilde must be > 1");
  if (!(dc.gamma > 0)) throw std::invalid_argument("config: gamma must be > 0");
  if (box_lo.size() != dd || box_hi.size() != dd) throw std::invalid_argument("config: action box has wrong dimension");
  for (std::size_t j = 0; j < dd; ++j)
    if (!(0 < box_lo[j] && box_lo[j] < box_hi[j])) throw std::invalid_argument("config: empty or non-positive action box");
  if (I0 && I0->size() != dd) throw std::invalid_argument("config: I0 has wrong dimension");
  if (measure_lo.size() != dd || measure_hi.size() != dd)
    throw std::invalid_argument("config: measure box has wrong dimension");
  if (!(T_check > 0) || !(horizon > 0) || !(orbit_dt > 0)) throw std::invalid_argument("config: horizons must be > 0");
  if (defect_samples < 1 || orbit_every < 1 || scan_n < 1) throw std::invalid_argument("config: counts must be >= 1");
  if (!(kam_radius > 0 && kam_radius <= 1)) throw std::invalid_argument("config: kam radius fraction must be in (0, 1]");
}

std::string ExperimentConfig::canonical() const {
  json j;
  j["network"] = json::parse(to_json(network));
  j["A_tilde"] = A_tilde;
  j["box"] = {{"lo", box_lo}, {"hi", box_hi}};
  if (I0) j["I0"] = *I0;
  j["scan_n"] = scan_n;
  j["dc"] = {{"gamma", dc.gamma}, {"K_split", dc.K_split}, {"K_check", dc.K_check}};
  const auto& nf = normal_form;
  j["normal_form"] = {{"s0", nf.s0},          {"tau0", nf.tau0},   {"steps", nf.steps},
                      {"tail_factor", nf.tail_factor}, {"nodes", nf.nodes}, {"n_angle", nf.n_angle},
                      {"n_time", nf.n_time},  {"oversample", nf.oversample}};
  j["kam"] = {{"max_steps", kam.max_steps}, {"tol", kam.tol},     {"s", kam.s},
              {"nodes", kam.nodes},         {"oversample", kam.oversample}, {"max_contraction", kam.max_contraction},
              {"radius", kam_radius}};
  j["torus"] = {{"n_angle", torus.n_angle}, {"n_time", torus.n_time}, {"n_out", torus.n_out}, {"drop", torus.drop}};
  j["verify"] = {{"T_check", T_check},   {"samples", defect_samples}, {"horizon", horizon},
                 {"orbit_dt", orbit_dt}, {"orbit_every", orbit_every}};
  j["measure"] = {{"gammas", gammas}, {"samples", measure_samples}, {"lo", measure_lo}, {"hi", measure_hi}};
  j["seed"] = seed;
  // The output directory does not change results, so it stays out of the hash.
  return j.dump();
}

std::string ExperimentConfig::hash() const { return io::hash_hex(canonical()); }

ExperimentConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir) {
  json j = json::parse(text);
  ExperimentConfig c;
  const json& net = j.at("network");
  if (net.is_string()) {
    std::filesystem::path p = net.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    c.network = network_from_json(io::read_file(p.string()));
  } else {
    c.network = network_from_json(net.dump());
  }
  const int d = c.d();
  take(j, "A_tilde", c.A_tilde);
  if (j.contains("eps")) c.A_tilde = 1.0 / j.at("eps").get<double>();
  c.box_lo.assign(d, 1.0);
  c.box_hi.assign(d, 2.0);
  if (j.contains("box")) {
    take(j["box"], "lo", c.box_lo);
    take(j["box"], "hi", c.box_hi);
  }
  if (j.contains("I0")) c.I0 = j.at("I0").get<std::vector<double>>();
  take(j, "scan_n", c.scan_n);
  if (j.contains("dc")) {
    const json& x = j["dc"];
    take(x, "gamma", c.dc.gamma);
    take(x, "K_split", c.dc.K_split);
    take(x, "K_check", c.dc.K_check);
  }
  if (j.contains("normal_form")) {
    const json& x = j["normal_form"];
    auto& nf = c.normal_form;
    take(x, "s0", nf.s0);
    take(x, "tau0", nf.tau0);
    take(x, "steps", nf.steps);
    take(x, "tail_factor", nf.tail_factor);
    take(x, "nodes", nf.nodes);
    take(x, "n_angle", nf.n_angle);
    take(x, "n_time", nf.n_time);
    take(x, "oversample", nf.oversample);
  }
  if (j.contains("kam")) {
    const json& x = j["kam"];
    take(x, "max_steps", c.kam.max_steps);
    take(x, "tol", c.kam.tol);
    take(x, "s", c.kam.s);
    take(x, "nodes", c.kam.nodes);
    take(x, "oversample", c.kam.oversample);
    take(x, "max_contraction", c.kam.max_contraction);
    take(x, "radius", c.kam_radius);
  }
  if (j.contains("torus")) {
    const json& x = j["torus"];
    take(x, "n_angle", c.torus.n_angle);
    take(x, "n_time", c.torus.n_time);
    take(x, "n_out", c.torus.n_out);
    take(x, "drop", c.torus.drop);
  }
  if (j.contains("verify")) {
    const json& x = j["verify"];
    take(x, "T_check", c.T_check);
    take(x, "samples", c.defect_samples);
    take(x, "horizon", c.horizon);
    take(x, "orbit_dt", c.orbit_dt);
    take(x, "orbit_every", c.orbit_every);
  }
  c.measure_lo.assign(d, 1.0);
  c.measure_hi.assign(d, 2.0);
  if (j.contains("measure")) {
    const json& x = j["measure"];
    take(x, "gammas", c.gammas);
    take(x, "samples", c.measure_samples);
    take(x, "lo", c.measure_lo);
    take(x, "hi", c.measure_hi);
  }
  take(j, "seed", c.seed);
  take(j, "out", c.out);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(io::read_file(path.string()), path.parent_path());
}

}  // namespace kamforge::cli
