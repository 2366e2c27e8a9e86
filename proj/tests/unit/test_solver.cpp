#include <doctest.h>

#include <random>

#include "fpb/solver.hpp"
#include "fpb/verification/oracles.hpp"
#include "test_support.hpp"

using namespace fpb;
using namespace fpb::testing;

namespace {

struct Line {
  GridSpec grid{1, 64, kTwoPi};
  DomainMask mask = DomainMask::boxes(grid, {IndexBox{16, 48}});
};

}  // namespace

TEST_CASE("mask bookkeeping") {
  Line l;
  CHECK(l.mask.interior_count() == 32);
  CHECK(l.mask.exterior_count() == 32);
  CHECK(l.mask.interior(16));
  CHECK_FALSE(l.mask.interior(48));
  const auto wide = DomainMask::boxes(l.grid, {IndexBox{8, 56}});
  CHECK(l.mask.subset_of(wide));
  CHECK_FALSE(wide.subset_of(l.mask));
  std::mt19937_64 rng(21);
  const Field u = smooth_random(l.grid, rng);
  const Field split = restrict_to_interior(u, l.mask) + restrict_to_exterior(u, l.mask);
  CHECK(max_abs_diff(split, u) == 0.0);
}

TEST_CASE("zero data gives the zero solution") {
  Line l;
  for (double p : {1.5, 2.0, 3.0}) {
    const auto r = solve_exterior_value(Field(l.grid, 1), l.mask, AnisotropyField::identity(l.grid, 1), 0.5, p, 1e-10);
    CHECK(r.converged);
    CHECK(max_abs(r.solution) < 1e-12);
    const auto q = solve_interior_source(Field(l.grid, 1), l.mask, AnisotropyField::identity(l.grid, 1), 0.5, p, 1e-10);
    CHECK(max_abs(q.solution) < 1e-12);
  }
}

TEST_CASE("linear problems agree with the dense oracle") {
  Line l;
  std::mt19937_64 rng(22);
  for (double s : {0.3, 0.5, 0.8}) {
    const Eigen::MatrixXd K = verification::dense_linear_operator(l.grid, s);
    const EnergyOperator op(AnisotropyField::identity(l.grid, 1), s, 2.0);
    SolverOptions opt;
    opt.tol = 1e-11;
    const Field u0 = smooth_random(l.grid, rng);
    const auto ext = solve_exterior_value(u0, l.mask, op, opt);
    REQUIRE(ext.converged);
    const Field ref = verification::dense_exterior_value(u0, l.mask, K);
    CHECK(max_abs_diff(ext.solution, ref) <= 1e-8 * max_abs(ref));
    for (std::size_t e : l.mask.exterior_points()) CHECK(ext.solution(e) == u0(e));

    const Field F = restrict_to_interior(smooth_random(l.grid, rng), l.mask);
    const auto src = solve_interior_source(F, l.mask, op, opt);
    REQUIRE(src.converged);
    const Field sref = verification::dense_interior_source(F, l.mask, K);
    CHECK(max_abs_diff(src.solution, sref) <= 1e-8 * max_abs(sref));
    CHECK(max_abs(restrict_to_exterior(src.solution, l.mask)) == 0.0);
  }
}

TEST_CASE("conformal p = 2 problem agrees with the dense oracle") {
  Line l;
  std::vector<double> sig(l.grid.size(), 1.0);
  for (int i = 24; i < 32; ++i) sig[i] = 2.5;
  const ConformalCoefficient sigma(l.grid, sig, 1.0);
  const EnergyOperator op(AnisotropyField::identity(l.grid, 1), 0.5, 2.0, sigma);
  std::mt19937_64 rng(23);
  const Field u0 = smooth_random(l.grid, rng);
  SolverOptions opt;
  opt.tol = 1e-11;
  const auto r = solve_exterior_value(u0, l.mask, op, opt);
  const Field ref = verification::dense_exterior_value(u0, l.mask, verification::dense_linear_operator(l.grid, 0.5, sigma));
  CHECK(max_abs_diff(r.solution, ref) <= 1e-8 * max_abs(ref));
}

TEST_CASE("homogeneity of the exterior solution") {
  Line l;
  std::mt19937_64 rng(24);
  const Field u0 = smooth_random(l.grid, rng);
  const EnergyOperator op(AnisotropyField::identity(l.grid, 1), 0.5, 3.0);
  SolverOptions opt;
  opt.tol = 1e-10;
  const auto one = solve_exterior_value(u0, l.mask, op, opt);
  REQUIRE(one.converged);
  for (double t : {-2.0, 0.5, 3.0}) {
    const auto r = solve_exterior_value(u0 * t, l.mask, op, opt);
    REQUIRE(r.converged);
    CHECK(max_abs_diff(r.solution, one.solution * t) <= 1e-6 * std::abs(t) * max_abs(one.solution));
  }
}

TEST_CASE("solver reports residual and energy consistently") {
  Line l;
  std::mt19937_64 rng(25);
  const Field u0 = smooth_random(l.grid, rng);
  const EnergyOperator op(AnisotropyField::identity(l.grid, 1), 0.4, 1.5);
  SolverOptions opt;
  opt.tol = 1e-8;
  const auto r = solve_exterior_value(u0, l.mask, op, opt);
  REQUIRE(r.converged);
  CHECK(r.epsilon == 0.0);
  CHECK(r.gradient_norm <= opt.tol);
  CHECK(r.gradient_norm == doctest::Approx(residual_sup(r.solution, nullptr, l.mask, op)));
  CHECK(r.energy == doctest::Approx(op.energy(r.solution)).epsilon(1e-12));
  CHECK(r.residual == doctest::Approx(weak_residual(r.solution, nullptr, l.mask, op, opt.residual_directions,
                                                    opt.residual_seed)));
  CHECK_FALSE(r.energy_history.empty());
  // The minimizer beats nearby competitors with the same exterior values.
  const Field bump = restrict_to_interior(smooth_random(l.grid, rng), l.mask);
  CHECK(op.energy(r.solution + bump * 1e-2) >= r.energy);
}

TEST_CASE("exhausted budget is reported, not hidden") {
  Line l;
  std::mt19937_64 rng(26);
  const Field u0 = smooth_random(l.grid, rng);
  const EnergyOperator op(AnisotropyField::identity(l.grid, 1), 0.5, 3.0);
  SolverOptions opt;
  opt.tol = 1e-12;
  opt.budget = 3;
  const auto r = solve_exterior_value(u0, l.mask, op, opt);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations <= 3);
  CHECK_FALSE(r.message.empty());
  CHECK(r.solution.is_finite());
}

TEST_CASE("anisotropic vector problem in two dimensions") {
  const GridSpec g(2, 16, kTwoPi);
  const auto mask = DomainMask::boxes(g, {IndexBox{4, 12, 4, 12}});
  const std::vector<double> diag = {1.0, 4.0};
  const EnergyOperator op(AnisotropyField::diagonal(g, diag), 0.5, 2.5);
  std::mt19937_64 rng(27);
  const Field u0 = smooth_random(g, rng, 2, 2);
  SolverOptions opt;
  opt.tol = 1e-9;
  const auto r = solve_exterior_value(u0, mask, op, opt);
  CHECK(r.converged);
  CHECK(r.solution.components() == 2);
}

TEST_CASE("uniqueness probe from random starts") {
  Line l;
  std::mt19937_64 rng(28);
  const Field u0 = smooth_random(l.grid, rng);
  for (double p : {1.5, 3.0}) {
    const EnergyOperator op(AnisotropyField::identity(l.grid, 1), 0.5, p);
    SolverOptions opt;
    opt.tol = 1e-9;
    opt.budget = 20000;
    const auto u = uniqueness_probe(l.mask, op, u0, ProblemKind::ExteriorValue, {1, 2, 3}, opt);
    CHECK(u.solves.size() == 3);
    CHECK(u.within_slack());
  }
}

TEST_CASE("invalid problems are rejected") {
  Line l;
  const GridSpec other(1, 32, kTwoPi);
  CHECK_THROWS(solve_exterior_value(Field(other, 1), l.mask, AnisotropyField::identity(l.grid, 1), 0.5, 2.0, 1e-8));
  CHECK_THROWS(solve_exterior_value(Field(l.grid, 1), l.mask, AnisotropyField::identity(l.grid, 1), 0.5, 1.0, 1e-8));
}
