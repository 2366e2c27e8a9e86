#include <doctest.h>

#include <random>

#include "fpb/grid_spectral.hpp"
#include "fpb/verification/oracles.hpp"
#include "test_support.hpp"

using namespace fpb;
using namespace fpb::testing;

TEST_CASE("grid geometry and frequency lattice") {
  const GridSpec g(2, 8, 4.0);
  CHECK(g.size() == 64);
  CHECK(g.spacing() == doctest::Approx(0.5));
  CHECK(g.cell_volume() == doctest::Approx(0.25));
  CHECK(g.flat_index(2, 3) == 2 * 8 + 3);
  const auto p = g.point(g.flat_index(2, 3));
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(1.5));
  CHECK(g.signed_mode(5) == -3);
  CHECK(g.signed_mode(4) == -4);
  CHECK_THROWS_AS(GridSpec(3, 8, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(1, 7, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(1, 8, -1.0), std::invalid_argument);
}

TEST_CASE("fractional Laplacian on an eigenfunction") {
  const GridSpec g(1, 16, kTwoPi);
  const Field u = Field::from_function(g, [](auto x) { return std::cos(3.0 * x[0]); });
  const Field v = fractional_laplacian(u, 0.7, LaplacianOrder::Full);
  CHECK(max_abs_diff(v, u * std::pow(3.0, 1.4)) < 1e-12);
  CHECK(max_abs_diff(fractional_laplacian(u, 0.0, LaplacianOrder::Full), u) < 1e-14);
}

TEST_CASE("multiplier semigroup on zero-mean fields") {
  const GridSpec g(2, 16, kTwoPi);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Field u = zero_mean(smooth_random(g, rng));
    const double s1 = unif(rng);
    const double s2 = unif(rng);
    const Field two = fractional_laplacian(fractional_laplacian(u, s1, LaplacianOrder::Full), s2, LaplacianOrder::Full);
    const Field one = fractional_laplacian(u, s1 + s2, LaplacianOrder::Full);
    CHECK(max_abs_diff(two, one) <= 1e-10 * max_abs(one));
  }
}

TEST_CASE("multiplier matches the dense cosine-sum oracle") {
  const GridSpec g(2, 8, kTwoPi);
  std::mt19937_64 rng(2);
  const Field u = smooth_random(g, rng);
  const Eigen::MatrixXd H = verification::dense_multiplier(g, 0.35);
  const Eigen::VectorXd expect = H * Eigen::Map<const Eigen::VectorXd>(u.values().data(), g.size());
  const Field got = fractional_laplacian(u, 0.7);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(got(i) == doctest::Approx(expect(i)).epsilon(1e-11));
}

TEST_CASE("Bessel potential identities") {
  const GridSpec g(1, 32, kTwoPi);
  std::mt19937_64 rng(3);
  const Field u = smooth_random(g, rng);
  CHECK(max_abs_diff(bessel_potential(u, 0.0), u) < 1e-14);
  Field c(g, 1);
  for (double& v : c.values()) v = 2.5;
  CHECK(max_abs_diff(bessel_potential(c, 1.3), c) < 1e-13);
  CHECK(max_abs_diff(bessel_potential(bessel_potential(u, 0.8), -0.8), u) < 1e-13);
}

TEST_CASE("norms") {
  const GridSpec g(1, 64, kTwoPi);
  const Field u = Field::from_function(g, [](auto x) { return std::cos(x[0]); });
  CHECK(lp_norm(u, 2.0) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
  CHECK(lp_norm(Field(g, 1), 3.0) == 0.0);
  CHECK(lp_norm(u * -2.5, 3.0) == doctest::Approx(2.5 * lp_norm(u, 3.0)).epsilon(1e-14));
  std::mt19937_64 rng(4);
  const Field r = smooth_random(g, rng, 8);
  CHECK(spectral_l2_norm_squared(r) == doctest::Approx(std::pow(lp_norm(r, 2.0), 2)).epsilon(1e-12));
  CHECK(hsp_norm(r, 0.0, 2.0) == doctest::Approx(lp_norm(r, 2.0)).epsilon(1e-13));
}

TEST_CASE("real input stays real and finite") {
  const GridSpec g(2, 16, 3.0);
  std::mt19937_64 rng(5);
  const Field u = smooth_random(g, rng, 3, 2);
  const Field v = fractional_laplacian(u, 0.6);
  CHECK(v.is_finite());
  CHECK(v.components() == 2);
}
