#include <doctest.h>

#include <random>

#include "fpb/dnmap.hpp"
#include "fpb/verification/oracles.hpp"
#include "test_support.hpp"

using namespace fpb;
using namespace fpb::testing;

namespace {

const GridSpec kGrid(1, 32, kTwoPi);
const DomainMask kMask = DomainMask::boxes(kGrid, {IndexBox{8, 24}});

SolverOptions tight() {
  SolverOptions o;
  o.tol = 1e-12;
  return o;
}

}  // namespace

TEST_CASE("trace datum zeroes the interior") {
  std::mt19937_64 rng(41);
  const Field u = smooth_random(kGrid, rng);
  const TraceDatum f(u, kMask);
  CHECK(max_abs(restrict_to_interior(f.field(), kMask)) == 0.0);
  CHECK(max_abs_diff(restrict_to_exterior(u, kMask), f.field()) == 0.0);
}

TEST_CASE("zero datum has zero response") {
  DnContext ctx(kMask, EnergyOperator(AnisotropyField::identity(kGrid, 1), 0.5, 3.0), tight());
  std::mt19937_64 rng(42);
  const TraceDatum zero(Field(kGrid, 1), kMask);
  const TraceDatum g(smooth_random(kGrid, rng), kMask);
  CHECK(dn_pair(ctx, zero, g) == 0.0);
}

TEST_CASE("pairing is (p-1)-homogeneous and the diagonal is positive") {
  std::mt19937_64 rng(43);
  for (double p : {1.5, 2.0, 3.0}) {
    SolverOptions o;
    o.tol = 1e-10;
    o.budget = 20000;
    DnContext ctx(kMask, EnergyOperator(AnisotropyField::identity(kGrid, 1), 0.5, p), o);
    const Field base = smooth_random(kGrid, rng);
    const TraceDatum f(base, kMask);
    const TraceDatum g(smooth_random(kGrid, rng), kMask);
    const double v = dn_pair(ctx, f, g);
    const double t = 2.0;
    const double vt = dn_pair(ctx, TraceDatum(base * t, kMask), g);
    CHECK(vt == doctest::Approx(std::pow(t, p - 1.0) * v).epsilon(1e-6));
    CHECK(dn_pair(ctx, f, f) > 0.0);
  }
}

TEST_CASE("linear DN matrix equals the dense Schur complement") {
  DnContext ctx(kMask, EnergyOperator(AnisotropyField::identity(kGrid, 1), 0.5, 2.0), tight());
  const Eigen::MatrixXd M = dn_matrix_linear(ctx);
  const Eigen::MatrixXd S = verification::dense_dn_matrix(kMask, verification::dense_linear_operator(kGrid, 0.5));
  REQUIRE(M.rows() == static_cast<Eigen::Index>(kMask.exterior_count()));
  CHECK((M - S).cwiseAbs().maxCoeff() <= 1e-10 * S.cwiseAbs().maxCoeff());
  CHECK((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * M.cwiseAbs().maxCoeff());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("doubling the conformal factor doubles the linear DN matrix") {
  const EnergyOperator base(AnisotropyField::identity(kGrid, 1), 0.5, 2.0);
  DnContext one(kMask, base, tight());
  DnContext two(kMask, base.with_conformal(ConformalCoefficient::constant(kGrid, 2.0, 1.0)), tight());
  const Eigen::MatrixXd M1 = dn_matrix_linear(one);
  const Eigen::MatrixXd M2 = dn_matrix_linear(two);
  CHECK((M2 - 2.0 * M1).cwiseAbs().maxCoeff() <= 1e-10 * M1.cwiseAbs().maxCoeff());
}

TEST_CASE("pairing does not depend on the interior representative") {
  std::mt19937_64 rng(44);
  for (double p : {2.0, 3.0}) {
    DnContext ctx(kMask, EnergyOperator(AnisotropyField::identity(kGrid, 1), 0.5, p), tight());
    const TraceDatum f(smooth_random(kGrid, rng), kMask);
    const TraceDatum g(smooth_random(kGrid, rng), kMask);
    const Field phi = restrict_to_interior(smooth_random(kGrid, rng), kMask);
    const auto q = quotient_independence_check(ctx, f, g, phi);
    CHECK(q.deviation <= q.slack);
    const double value = dn_pair(ctx, f, g);
    CHECK(dn_pair_error_bound(ctx, f, value) >= 0.0);
  }
}

TEST_CASE("exterior solves are cached") {
  std::mt19937_64 rng(45);
  DnContext ctx(kMask, EnergyOperator(AnisotropyField::identity(kGrid, 1), 0.5, 2.0), tight());
  const TraceDatum f(smooth_random(kGrid, rng), kMask);
  const TraceDatum g(smooth_random(kGrid, rng), kMask);
  dn_pair(ctx, f, g);
  dn_pair(ctx, f, f);
  CHECK(ctx.cache_size() == 1);
  dn_pair(ctx, g, f);
  CHECK(ctx.cache_size() == 2);
}

TEST_CASE("matrix assembly requires the linear case") {
  DnContext ctx(kMask, EnergyOperator(AnisotropyField::identity(kGrid, 1), 0.5, 3.0), tight());
  CHECK_THROWS(dn_matrix_linear(ctx));
}
