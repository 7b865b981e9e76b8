#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kamforge/diophantine.hpp"
#include "kamforge/duffing.hpp"
#include "kamforge/hamiltonian.hpp"
#include "kamforge/kam.hpp"
#include "kamforge/torus.hpp"

namespace kamforge::cli {

/// Everything a run needs. Loaded from JSON; command-line flags override.
struct ExperimentConfig {
  DuffingNetwork network;
  double A_tilde = 10.0;
  // Action box in oscillator units, and an optional explicit expansion point.
  std::vector<double> box_lo, box_hi;
  std::optional<std::vector<double>> I0;
  int scan_n = 16;

  DiophantineParams dc;
  NormalFormParams normal_form;
  KamParams kam;
  double kam_radius = 0.25;  // r0 as a fraction of the last normal-form radius
  TorusParams torus;

  double T_check = 100.0;
  int defect_samples = 16;
  double horizon = 1e4;
  double orbit_dt = 0.05;     // spacing of orbit samples used for the rotation vector
  int orbit_every = 20;       // every k-th orbit sample goes to orbit.csv

  std::vector<double> gammas = {4e-3, 2e-3, 1e-3, 5e-4};
  std::size_t measure_samples = 10000;
  std::vector<double> measure_lo, measure_hi;  // frequency box, default [1,2]^d

  std::uint64_t seed = 1;
  std::string out = "out";

  int d() const { return network.m; }
  void validate() const;
  /// Canonical JSON of the effective configuration (network inlined).
  std::string canonical() const;
  std::string hash() const;
};

/// `network` may be an inline object or a path relative to the config file.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir = {});

}  // namespace kamforge::cli
