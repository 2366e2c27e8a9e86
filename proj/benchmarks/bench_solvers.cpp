#include <benchmark/benchmark.h>

#include <cmath>

#include "fpb/dnmap.hpp"
#include "fpb/poincare.hpp"
#include "fpb/solver.hpp"

namespace {

struct Square {
  fpb::GridSpec grid;
  fpb::DomainMask mask;
  explicit Square(int N)
      : grid(2, N, 2.0 * M_PI), mask(fpb::DomainMask::boxes(grid, {fpb::IndexBox{N / 4, 3 * N / 4, N / 4, 3 * N / 4}})) {}
};

fpb::Field datum(const fpb::GridSpec& g) {
  return fpb::Field::from_function(g, [](auto x) { return std::cos(x[0]) * std::cos(2.0 * x[1]); });
}

void BM_ExteriorSolve(benchmark::State& state) {
  const Square sq(static_cast<int>(state.range(0)));
  const double p = static_cast<double>(state.range(1)) / 2.0;
  const fpb::EnergyOperator op(fpb::AnisotropyField::identity(sq.grid, 1), 0.5, p);
  fpb::SolverOptions opt;
  opt.tol = 1e-8;
  const fpb::Field u0 = datum(sq.grid);
  std::size_t iterations = 0;
  for (auto _ : state) {
    const auto r = fpb::solve_exterior_value(u0, sq.mask, op, opt);
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.energy);
  }
  state.counters["optimizer_iterations"] = static_cast<double>(iterations);
}
BENCHMARK(BM_ExteriorSolve)->Args({32, 4})->Args({32, 6})->Args({32, 3})->Args({64, 4})->Args({64, 6})
    ->Unit(benchmark::kMillisecond);

void BM_Poincare(benchmark::State& state) {
  const Square sq(32);
  fpb::PoincareOptions opt;
  opt.restarts = 1;
  const double p = static_cast<double>(state.range(0)) / 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(fpb::poincare_eigenpair(sq.mask, 0.5, p, opt).lambda1);
}
BENCHMARK(BM_Poincare)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_DnMatrix(benchmark::State& state) {
  const fpb::GridSpec g(1, static_cast<int>(state.range(0)), 2.0 * M_PI);
  const int N = g.points_per_axis();
  const auto mask = fpb::DomainMask::boxes(g, {fpb::IndexBox{N / 4, 3 * N / 4}});
  for (auto _ : state) {
    fpb::DnContext ctx(mask, fpb::EnergyOperator(fpb::AnisotropyField::identity(g, 1), 0.5, 2.0));
    benchmark::DoNotOptimize(fpb::dn_matrix_linear(ctx));
  }
}
BENCHMARK(BM_DnMatrix)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
