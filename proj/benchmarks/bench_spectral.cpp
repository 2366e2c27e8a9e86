#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "fpb/cs_extension.hpp"
#include "fpb/energy_ops.hpp"
#include "fpb/grid_spectral.hpp"

namespace {

fpb::Field noise(const fpb::GridSpec& g, int m = 1) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  fpb::Field f(g, m);
  for (double& v : f.values()) v = nd(rng);
  return f;
}

void BM_MultiplierApply(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const fpb::GridSpec g(dim, static_cast<int>(state.range(1)), 2.0 * M_PI);
  const auto op = fpb::MultiplierOp::fractional_laplacian(g, 0.5);
  const fpb::Field u = noise(g);
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(u));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_MultiplierApply)->Args({1, 256})->Args({1, 4096})->Args({2, 64})->Args({2, 256});

void BM_EnergyAndGradient(benchmark::State& state) {
  const fpb::GridSpec g(2, static_cast<int>(state.range(0)), 2.0 * M_PI);
  const fpb::EnergyOperator op(fpb::AnisotropyField::constant(g, 2, 1.5), 0.5, 3.0);
  const fpb::Field u = noise(g, 2);
  fpb::Field grad(g, 2);
  for (auto _ : state) benchmark::DoNotOptimize(op.energy_and_gradient(u, 0.0, grad));
}
BENCHMARK(BM_EnergyAndGradient)->Arg(32)->Arg(64)->Arg(128);

void BM_Extension(benchmark::State& state) {
  const fpb::GridSpec g(1, static_cast<int>(state.range(0)), 2.0 * M_PI);
  const fpb::Field u = fpb::Field::from_function(g, [](auto x) { return std::cos(3.0 * x[0]); });
  const fpb::PoissonKernelSpec spec(1, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(fpb::extend(u, fpb::geometric_heights(0.5, 0.5, 6), spec));
}
BENCHMARK(BM_Extension)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
