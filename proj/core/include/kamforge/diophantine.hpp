#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace kamforge {

/// Two-regime Diophantine condition on Omega = eps^{-a} omega:
///   |<k, Omega> + l| >= eps^{-a} gamma / |k|^{d+1}   for |k| + |l| <= K_split,
///   |<k, Omega> + l| >= gamma / (1 + |k|)^{d+1}      for K_split < |k| + |l| <= K_check.
struct DiophantineParams {
  double gamma = 1e-3;
  int K_split = 40;
  int K_check = 400;
  double eps = 0.1;
  double a = 1.0;

  /// gamma = log(1/eps)^{-2 C1}, K_split = log(1/eps)^{C1}, K_check = 10 K_split.
  static DiophantineParams log_law(double eps, double a, double C1);
};

/// |eps^{-a} <k, omega> + l| with compensated summation.
double small_divisor(std::span<const int> k, int l, std::span<const double> omega, double eps, double a);

struct DcReport {
  bool pass = true;
  /// min over checked modes of divisor / bound; pass iff margin >= 1.
  double margin = 0.0;
  std::vector<int> k;  // worst mode
  int l = 0;
  int regime = 1;
  double divisor = 0.0;
};

DcReport check_dc(std::span<const double> omega, const DiophantineParams& p);
/// margin * gamma: the largest gamma for which omega passes (independent of gamma).
double critical_gamma(std::span<const double> omega, const DiophantineParams& p);

struct MarginSample {
  std::vector<double> I;
  double margin = 0.0;
  bool pass = false;
};

struct DcPoint {
  std::vector<double> I0;
  std::vector<double> omega;
  DcReport report;
  std::vector<MarginSample> map;  // every grid point, lexicographic
};

using FrequencyMap = std::function<std::vector<double>(std::span<const double>)>;

/// Scans cell centres of an n^d grid over [lo, hi] and returns the point with
/// the largest margin (first one in lexicographic order on ties).
DcPoint find_dc_point(const FrequencyMap& omega_of, std::span<const double> lo, std::span<const double> hi,
                      const DiophantineParams& p, int n);

/// Radius around I0 on which the first-regime bound holds with gamma/2, given
/// margin M at I0 and a Lipschitz constant L of omega (sup norm).
double dc_stable_radius(double margin, const DiophantineParams& p, int d, double lipschitz);

struct MeasureEstimate {
  double gamma = 0.0;
  double fraction = 0.0;
  double lo = 0.0;  // Wilson 95% interval
  double hi = 0.0;
  std::size_t samples = 0;
  std::size_t excluded = 0;
};

/// Monte-Carlo fraction of omega in the box [lo, hi] failing the condition.
MeasureEstimate excluded_measure(const DiophantineParams& p, std::span<const double> lo, std::span<const double> hi,
                                 std::size_t samples, std::uint64_t seed);
/// Same samples for every gamma, so the estimates are exactly monotone in gamma.
std::vector<MeasureEstimate> excluded_measure_sweep(const DiophantineParams& p, std::span<const double> gammas,
                                                    std::span<const double> lo, std::span<const double> hi,
                                                    std::size_t samples, std::uint64_t seed);

}  // namespace kamforge
