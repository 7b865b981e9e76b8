#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "kamforge/diophantine.hpp"
#include "kamforge/duffing.hpp"
#include "kamforge/oscillator.hpp"
#include "kamforge/spectral.hpp"

using namespace kamforge;

namespace {

spectral::Coeffs random_coeffs(const spectral::Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  spectral::Coeffs c(g.size());
  for (auto& x : c) x = {N(rng), N(rng)};
  spectral::symmetrize(c, g);
  return c;
}

void BM_TransformRoundTrip(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  spectral::Grid g{2, n, n / 2};
  auto c = random_coeffs(g, 1);
  for (auto _ : state) {
    auto v = spectral::to_values(c, g);
    benchmark::DoNotOptimize(spectral::to_coeffs(v, g));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_TransformRoundTrip)->Arg(16)->Arg(32)->Arg(64);

void BM_Cohomological(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  spectral::Grid g{2, n, n / 2};
  auto r = random_coeffs(g, 2);
  std::vector<double> freq{std::sqrt(2.0), std::sqrt(3.0)};
  for (auto _ : state) benchmark::DoNotOptimize(spectral::solve_cohomological(r, g, freq, g.max_order(), false));
}
BENCHMARK(BM_Cohomological)->Arg(16)->Arg(32)->Arg(64);

void BM_CheckDc(benchmark::State& state) {
  DiophantineParams p;
  p.K_split = 40;
  p.K_check = static_cast<int>(state.range(0));
  std::vector<double> om{1.0 + 0.1 * std::sqrt(2.0), 1.0 + 0.1 * std::sqrt(3.0)};
  for (auto _ : state) benchmark::DoNotOptimize(check_dc(om, p));
}
BENCHMARK(BM_CheckDc)->Arg(100)->Arg(400);

void BM_ReferenceOrbit(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(reference_solution(1, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ReferenceOrbit)->Arg(256)->Arg(1024);

void BM_ActionAngleForward(benchmark::State& state) {
  ActionAngleMap map(1, 2);
  double th = 0.0;
  for (auto _ : state) {
    th += 0.001;
    benchmark::DoNotOptimize(map.forward(th, 1.5));
  }
}
BENCHMARK(BM_ActionAngleForward);

void BM_IntegrateCoupledPair(benchmark::State& state) {
  DuffingNetwork net;
  net.m = 2;
  net.n = 1;
  FourierField p(0);
  p.assign(ModeIndex{{}, 0}, 0.02);
  p.assign(ModeIndex{{}, 2}, 0.005);
  net.add_term({1, 1}, p);
  std::vector<double> x0{10.0, 14.0}, v0{0.0, 0.0};
  const double h = default_step(1, 14.0);
  for (auto _ : state) benchmark::DoNotOptimize(integrate(net, x0, v0, 10000 * h, h, 1000));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_IntegrateCoupledPair);

}  // namespace
BENCHMARK_MAIN();
