#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fpb/inverse.hpp"
#include "test_support.hpp"

using namespace fpb;
using namespace fpb::testing;

namespace {

const GridSpec kGrid(1, 64, kTwoPi);
const DomainMask kMask = DomainMask::boxes(kGrid, {IndexBox{16, 48}});
const AnisotropyField kId = AnisotropyField::identity(kGrid, 1);

SolverOptions opts() {
  SolverOptions o;
  o.tol = 1e-9;
  o.budget = 20000;
  return o;
}

ConformalCoefficient with_block(const BlockPartition& blocks, std::size_t b, double value) {
  std::vector<double> v(kGrid.size(), 1.0);
  for (std::size_t i : blocks.blocks[b]) v[i] = value;
  return ConformalCoefficient(kGrid, v, 1.0);
}

std::vector<std::size_t> range_points(int i0, int i1) {
  std::vector<std::size_t> out;
  for (int i = i0; i < i1; ++i) out.push_back(static_cast<std::size_t>(i));
  return out;
}

}  // namespace

TEST_CASE("block tiling") {
  const auto b = tile_blocks(kGrid, {16, 48}, 4);
  REQUIRE(b.blocks.size() == 8);
  std::set<std::size_t> all;
  for (const auto& blk : b.blocks) {
    CHECK(blk.size() == 4);
    all.insert(blk.begin(), blk.end());
  }
  CHECK(all.size() == 32);
  CHECK(*all.begin() == 16);
  const GridSpec sq(2, 16, 1.0);
  const auto b2 = tile_blocks(sq, {4, 12, 4, 12}, 4);
  CHECK(b2.blocks.size() == 4);
  CHECK(b2.blocks[0].size() == 16);
  CHECK_THROWS_AS(tile_blocks(kGrid, {16, 47}, 4), std::invalid_argument);
}

TEST_CASE("bump fields and window probes") {
  const Field bump = bump_field(kGrid, 1.0, 0.0, 3.0);
  CHECK(bump(1) == doctest::Approx(1.0));
  CHECK(bump(63) > 0.0);
  CHECK(bump(10) == 0.0);
  const auto window = range_points(4, 16);
  const auto probes = window_probes(kGrid, window, 5, 2.0, 9);
  REQUIRE(probes.size() == 5);
  for (const Field& f : probes) {
    CHECK(max_abs(f) > 0.0);
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
      if (i < 4 || i >= 16) CHECK(f(i) == 0.0);
    }
  }
  const auto again = window_probes(kGrid, window, 5, 2.0, 9);
  for (std::size_t k = 0; k < probes.size(); ++k) CHECK(max_abs_diff(probes[k], again[k]) == 0.0);
}

TEST_CASE("gap is antisymmetric and matches the oracle measurements") {
  std::mt19937_64 rng(61);
  const auto blocks = tile_blocks(kGrid, {16, 48}, 4);
  const auto s1 = with_block(blocks, 2, 2.0);
  const auto s2 = ConformalCoefficient::constant(kGrid, 1.0, 1.0);
  const TraceDatum u0(smooth_random(kGrid, rng), kMask);
  for (double p : {2.0, 3.0}) {
    const auto ab = dn_gap(u0, s1, s2, kId, kMask, 0.5, p, opts());
    const auto ba = dn_gap(u0, s2, s1, kId, kMask, 0.5, p, opts());
    CHECK(ab.gap == doctest::Approx(-ba.gap).epsilon(1e-12));
    CHECK(ab.gap > ab.slack);
    MeasurementOracle o1(kMask, kId, 0.5, p, s1, opts());
    MeasurementOracle o2(kMask, kId, 0.5, p, s2, opts());
    const double diff = o1.measure(u0).value - o2.measure(u0).value;
    CHECK(std::abs(diff - ab.gap) <= ab.slack);
    CHECK(o1.forward_solves() == 1);
  }
}

TEST_CASE("constant factors give the closed-form bound ratio") {
  std::mt19937_64 rng(62);
  const TraceDatum u0(smooth_random(kGrid, rng), kMask);
  const auto two = ConformalCoefficient::constant(kGrid, 2.0, 1.0);
  const auto one = ConformalCoefficient::constant(kGrid, 1.0, 1.0);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto r = monotonicity_bounds(u0, two, one, kId, kMask, 0.5, p, opts());
    const double e = 1.0 / (p - 1.0);
    const double expect = (p - 1.0) * std::pow(2.0, -e) * (std::pow(2.0, e) - 1.0);
    CHECK(r.lower / r.upper == doctest::Approx(expect).epsilon(1e-9));
    CHECK(r.holds());
  }
}

TEST_CASE("sandwich holds for random smooth contrasts") {
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 9; ++k) {
    const double p = k % 3 == 0 ? 1.5 : (k % 3 == 1 ? 2.0 : 3.0);
    std::vector<double> v1(kGrid.size());
    std::vector<double> v2(kGrid.size());
    const double c0 = 16 + 32 * unif(rng);
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
      v2[i] = 1.0 + 0.3 * std::sin(kTwoPi * i / 64.0);
      const double d = (static_cast<double>(i) - c0) / 5.0;
      v1[i] = v2[i] + std::exp(-d * d);
    }
    const auto r = monotonicity_bounds(TraceDatum(smooth_random(kGrid, rng), kMask),
                                       ConformalCoefficient(kGrid, v1, 0.5), ConformalCoefficient(kGrid, v2, 0.5),
                                       kId, kMask, 0.5, p, opts());
    CHECK(r.holds());
    CHECK(r.lower > 0.0);
    CHECK(r.lower <= r.upper);
  }
}

TEST_CASE("beta family reduces to the lower bound at beta = p - 1") {
  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> unif(1.0, 2.0);
  std::vector<double> v1(kGrid.size());
  std::vector<double> v2(kGrid.size());
  std::vector<double> rho(kGrid.size());
  for (std::size_t i = 0; i < kGrid.size(); ++i) {
    v2[i] = unif(rng);
    v1[i] = v2[i] + unif(rng);
    rho[i] = unif(rng) - 1.0;
  }
  const ConformalCoefficient s1(kGrid, v1, 1.0);
  const ConformalCoefficient s2(kGrid, v2, 1.0);
  const double h = kGrid.cell_volume();
  for (double p : {1.5, 2.0, 3.0}) {
    const double e = 1.0 / (p - 1.0);
    double lower = 0.0;
    for (std::size_t i = 0; i < kGrid.size(); ++i)
      lower += (p - 1.0) * v2[i] * std::pow(v1[i], -e) * (std::pow(v1[i], e) - std::pow(v2[i], e)) * rho[i] * h;
    CHECK(beta_lower_bound(p - 1.0, s1, s2, rho, p, h) == doctest::Approx(lower).epsilon(1e-12));
    const auto scan = beta_scan(s1, s1, rho, p, h);
    CHECK(scan.betas.size() == 41);
    CHECK(scan.argmax == doctest::Approx(p - 1.0));
  }
}

TEST_CASE("single measurement: inclusion detected, equal factors within slack") {
  std::mt19937_64 rng(65);
  const auto blocks = tile_blocks(kGrid, {16, 48}, 4);
  const Field u0 = smooth_random(kGrid, rng);
  const auto bg = ConformalCoefficient::constant(kGrid, 1.0, 1.0);
  const auto inc = with_block(blocks, 3, 2.0);
  const auto r = single_measurement_experiment(inc, bg, kId, kMask, 0.5, 2.0, u0, blocks, opts());
  CHECK(r.verified);
  CHECK(r.gap_positive);
  CHECK(r.block_contrast[3]);
  CHECK(std::count(r.block_contrast.begin(), r.block_contrast.end(), true) == 1);
  const auto same = single_measurement_experiment(bg, bg, kId, kMask, 0.5, 2.0, u0, blocks, opts());
  CHECK(same.coefficients_equal);
  CHECK(same.verified);
  CHECK(std::abs(same.gap) <= same.slack);
  CHECK(std::none_of(same.block_flagged.begin(), same.block_flagged.end(), [](bool b) { return b; }));
  CHECK_THROWS_AS(single_measurement_experiment(bg, inc, kId, kMask, 0.5, 2.0, u0, blocks, opts()),
                  std::invalid_argument);
  CHECK_THROWS_AS(single_measurement_experiment(inc, bg, kId, kMask, 0.5, 2.0, Field(kGrid, 1), blocks, opts()),
                  std::invalid_argument);
}

TEST_CASE("probes from two exterior windows together see every block") {
  const auto blocks = tile_blocks(kGrid, {16, 48}, 4);
  const auto bg = ConformalCoefficient::constant(kGrid, 1.0, 1.0);
  std::vector<bool> left(blocks.blocks.size(), false);
  std::vector<bool> right(blocks.blocks.size(), false);
  for (const Field& f : window_probes(kGrid, range_points(6, 16), 3, 3.0, 5)) {
    const auto d = detectable_blocks(bg, kId, kMask, 0.5, 2.0, f, blocks, 1.0, 1e-9, opts());
    for (std::size_t b = 0; b < d.size(); ++b) left[b] = left[b] || d[b];
  }
  for (const Field& f : window_probes(kGrid, range_points(48, 58), 3, 3.0, 6)) {
    const auto d = detectable_blocks(bg, kId, kMask, 0.5, 2.0, f, blocks, 1.0, 1e-9, opts());
    for (std::size_t b = 0; b < d.size(); ++b) right[b] = right[b] || d[b];
  }
  for (std::size_t b = 0; b < blocks.blocks.size(); ++b) CHECK((left[b] || right[b]));
  CHECK(left.front());
  CHECK(right.back());
}

namespace {

struct Recon {
  BlockPartition blocks = tile_blocks(kGrid, {16, 48}, 4);
  std::vector<double> levels{1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75};
  std::vector<TraceDatum> probes;
  Recon() {
    auto window = range_points(4, 16);
    const auto right = range_points(48, 60);
    window.insert(window.end(), right.begin(), right.end());
    for (const Field& f : window_probes(kGrid, window, 6, 2.5, 3)) probes.emplace_back(f, kMask);
  }
  SigmaEstimate run(const ReconstructionOptions& ro) {
    MeasurementOracle oracle(kMask, kId, 0.5, 2.0, with_block(blocks, 5, 2.0), opts());
    return reconstruct_sigma(oracle, probes, blocks, levels, kMask, kId, 0.5, 2.0, opts(), ro);
  }
};

}  // namespace

TEST_CASE("noise-free reconstruction recovers a single inclusion") {
  Recon r;
  const auto est = r.run({});
  REQUIRE(est.estimate.size() == 8);
  for (std::size_t b = 0; b < 8; ++b) {
    const double truth = b == 5 ? 2.0 : 1.0;
    CHECK(est.lower[b] <= truth);
    CHECK(est.upper[b] >= truth);
    CHECK(std::abs(est.estimate[b] - truth) <= 0.05 * truth);
  }
  CHECK_FALSE(est.budget_exhausted);
  CHECK(est.measurements.size() == r.probes.size());
  CHECK_FALSE(est.ledger.empty());
  for (const auto& row : est.ledger) {
    CHECK((row.test == "above" || row.test == "below"));
    CHECK((row.verdict == "excluded" || row.verdict == "kept"));
  }
  const auto field = est.field(kGrid, r.blocks, 1.0);
  CHECK(field[r.blocks.blocks[5][0]] == doctest::Approx(est.estimate[5]));
  CHECK(field[0] == 1.0);
}

TEST_CASE("noisy reconstruction keeps the truth inside every interval") {
  Recon r;
  ReconstructionOptions ro;
  ro.noise = 1e-3;
  ro.noise_seed = 4;
  const auto est = r.run(ro);
  for (std::size_t b = 0; b < 8; ++b) {
    const double truth = b == 5 ? 2.0 : 1.0;
    CHECK(est.lower[b] <= truth);
    CHECK(est.upper[b] >= truth);
  }
  for (const auto& m : est.measurements) CHECK(m.noise == 1e-3);
}

TEST_CASE("exhausted scan budget still returns valid intervals") {
  Recon r;
  ReconstructionOptions ro;
  ro.budget = 4;
  const auto est = r.run(ro);
  CHECK(est.budget_exhausted);
  CHECK(est.simulations <= 4);
  REQUIRE(est.lower.size() == 8);
  for (std::size_t b = 0; b < 8; ++b) {
    const double truth = b == 5 ? 2.0 : 1.0;
    CHECK(est.lower[b] <= truth);
    CHECK(est.upper[b] >= truth);
  }
  CHECK_FALSE(est.inconclusive.empty());
}

TEST_CASE("measurement noise is seeded and bounded") {
  std::mt19937_64 rng(66);
  const TraceDatum u0(smooth_random(kGrid, rng), kMask);
  MeasurementOracle o(kMask, kId, 0.5, 2.0, ConformalCoefficient::constant(kGrid, 1.0, 1.0), opts());
  const double clean = o.measure(u0).value;
  const double a = o.measure(u0, 1e-2, 7).value;
  const double b = o.measure(u0, 1e-2, 7).value;
  const double c = o.measure(u0, 1e-2, 8).value;
  CHECK(a == b);
  CHECK(a != c);
  CHECK(std::abs(a - clean) <= 1e-2 * std::abs(clean));
}
