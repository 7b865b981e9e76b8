#include "kamforge/diophantine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "kamforge/parallel.hpp"

namespace kamforge {

namespace {

// Error-free transforms.
inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  double z = s - a;
  e = (a - (s - z)) + (b - z);
}

struct Compensated {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double e;
    two_sum(s, x, s, e);
    c += e;
  }
  double value() const { return s + c; }
};

struct Scan {
  double ratio = std::numeric_limits<double>::infinity();
  std::vector<int> k;
  int l = 0;
  int regime = 1;
};

// Enumerates k with |k|_1 <= K_check, first nonzero entry positive (k and -k
// give the same set of divisors), and the integers l next to -<k, Omega>.
Scan scan(std::span<const double> omega, const DiophantineParams& p) {
  const int d = static_cast<int>(omega.size());
  const double s = std::pow(p.eps, -p.a);
  const double wmax = std::abs(*std::max_element(omega.begin(), omega.end(),
                                                 [](double x, double y) { return std::abs(x) < std::abs(y); }));
  Scan best;
  std::vector<int> k(d, 0);
  std::vector<double> W(d);
  for (int j = 0; j < d; ++j) W[j] = s * omega[j];

  // Recursive enumeration over the remaining l1 budget.
  auto visit = [&](auto&& self, int j, int budget, bool leading) -> void {
    if (j == d) {
      int nk = 0;
      for (int v : k) nk += std::abs(v);
      if (nk == 0) return;
      double x = 0.0;
      for (int i = 0; i < d; ++i) x = std::fma(k[i], W[i], x);
      double lr = std::nearbyint(-x);
      int lmax_remark = static_cast<int>(1.0 + s * nk * wmax);
      for (int dl = -1; dl <= 1; ++dl) {
        double lv = lr + dl;
        if (std::abs(lv) > p.K_check - nk || std::abs(lv) > lmax_remark) continue;
        int l = static_cast<int>(lv);
        int ord = nk + std::abs(l);
        double bound = ord <= p.K_split ? s / std::pow(nk, d + 1.0) : 1.0 / std::pow(1.0 + nk, d + 1.0);
        double ratio = std::abs(x + lv) / bound;
        if (ratio < best.ratio) {
          best.ratio = ratio;
          best.k = k;
          best.l = l;
          best.regime = ord <= p.K_split ? 1 : 2;
        }
      }
      return;
    }
    int lo = leading ? 0 : -budget;
    for (int v = lo; v <= budget; ++v) {
      k[j] = v;
      self(self, j + 1, budget - std::abs(v), leading && v == 0);
    }
    k[j] = 0;
  };
  visit(visit, 0, p.K_check, true);
  return best;
}

}  // namespace

DiophantineParams DiophantineParams::log_law(double eps, double a, double C1) {
  DiophantineParams p;
  double L = std::log(1.0 / eps);
  p.gamma = std::pow(L, -2.0 * C1);
  p.K_split = std::max(1, static_cast<int>(std::ceil(std::pow(L, C1))));
  p.K_check = 10 * p.K_split;
  p.eps = eps;
  p.a = a;
  return p;
}

double small_divisor(std::span<const int> k, int l, std::span<const double> omega, double eps, double a) {
  if (k.size() != omega.size()) throw std::invalid_argument("small_divisor: dimension mismatch");
  const double s = std::pow(eps, -a);
  Compensated acc;
  acc.add(static_cast<double>(l));
  for (std::size_t j = 0; j < k.size(); ++j) {
    double hi = s * omega[j];
    double lo = std::fma(s, omega[j], -hi);
    double p = hi * k[j];
    double pe = std::fma(hi, static_cast<double>(k[j]), -p);
    acc.add(p);
    acc.add(pe);
    acc.add(lo * k[j]);
  }
  return std::abs(acc.value());
}

DcReport check_dc(std::span<const double> omega, const DiophantineParams& p) {
  if (!(p.gamma >= 0)) throw std::invalid_argument("check_dc: gamma must be >= 0");
  if (p.K_split < 1 || p.K_check < p.K_split) throw std::invalid_argument("check_dc: need 1 <= K_split <= K_check");
  Scan sc = scan(omega, p);
  DcReport r;
  if (sc.k.empty()) return r;
  r.k = sc.k;
  r.l = sc.l;
  r.regime = sc.regime;
  r.divisor = small_divisor(sc.k, sc.l, omega, p.eps, p.a);
  r.margin = p.gamma > 0 ? sc.ratio / p.gamma : std::numeric_limits<double>::infinity();
  r.pass = r.margin >= 1.0;
  return r;
}

double critical_gamma(std::span<const double> omega, const DiophantineParams& p) { return scan(omega, p).ratio; }

DcPoint find_dc_point(const FrequencyMap& omega_of, std::span<const double> lo, std::span<const double> hi,
                      const DiophantineParams& p, int n) {
  const int d = static_cast<int>(lo.size());
  if (n < 1) throw std::invalid_argument("find_dc_point: grid resolution must be >= 1");
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) total *= n;
  DcPoint out;
  out.map.resize(total);
  std::vector<DcReport> reps(total);
  parallel_for(total, [&](std::size_t f) {
    std::vector<double> I(d);
    std::size_t rem = f;
    for (int j = d - 1; j >= 0; --j) {
      I[j] = lo[j] + (hi[j] - lo[j]) * ((rem % n) + 0.5) / n;
      rem /= n;
    }
    reps[f] = check_dc(omega_of(I), p);
    out.map[f] = MarginSample{I, reps[f].margin, reps[f].pass};
  });
  std::size_t best = 0;
  for (std::size_t f = 1; f < total; ++f)
    if (out.map[f].margin > out.map[best].margin) best = f;
  out.I0 = out.map[best].I;
  out.omega = omega_of(out.I0);
  out.report = reps[best];
  return out;
}

double dc_stable_radius(double margin, const DiophantineParams& p, int d, double lipschitz) {
  if (margin <= 0.5 || !(lipschitz > 0)) return 0.0;
  return (margin - 0.5) * p.gamma / (std::pow(p.K_split, d + 2.0) * lipschitz);
}

namespace {

void wilson(MeasureEstimate& m) {
  const double z = 1.959963984540054;
  double n = static_cast<double>(m.samples);
  double ph = m.fraction;
  double den = 1.0 + z * z / n;
  double mid = (ph + z * z / (2 * n)) / den;
  double half = z * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den;
  m.lo = std::max(0.0, mid - half);
  m.hi = std::min(1.0, mid + half);
}

}  // namespace

std::vector<MeasureEstimate> excluded_measure_sweep(const DiophantineParams& p, std::span<const double> gammas,
                                                    std::span<const double> lo, std::span<const double> hi,
                                                    std::size_t samples, std::uint64_t seed) {
  if (samples < 1000) throw std::invalid_argument("excluded_measure: need at least 1000 samples");
  const int d = static_cast<int>(lo.size());
  // Draw all points up front from one stream; evaluation order then cannot
  // affect the result.
  std::mt19937_64 rng(seed);
  std::vector<double> pts(samples * d);
  for (auto& v : pts) v = std::generate_canonical<double, 53>(rng);
  std::vector<double> crit(samples);
  parallel_for(samples, [&](std::size_t i) {
    std::vector<double> w(d);
    for (int j = 0; j < d; ++j) w[j] = lo[j] + (hi[j] - lo[j]) * pts[i * d + j];
    crit[i] = critical_gamma(w, p);
  });
  std::vector<MeasureEstimate> out;
  for (double g : gammas) {
    MeasureEstimate m;
    m.gamma = g;
    m.samples = samples;
    m.excluded = static_cast<std::size_t>(std::count_if(crit.begin(), crit.end(), [&](double c) { return c < g; }));
    m.fraction = static_cast<double>(m.excluded) / samples;
    wilson(m);
    out.push_back(m);
  }
  return out;
}

MeasureEstimate excluded_measure(const DiophantineParams& p, std::span<const double> lo, std::span<const double> hi,
                                 std::size_t samples, std::uint64_t seed) {
  double g = p.gamma;
  return excluded_measure_sweep(p, std::span<const double>(&g, 1), lo, hi, samples, seed).front();
}

}  // namespace kamforge
