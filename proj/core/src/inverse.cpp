#include "fpb/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "fpb/parallel.hpp"

namespace fpb {

namespace {

void require_floor(const ConformalCoefficient& a, const ConformalCoefficient& b, const GridSpec& grid) {
  if (!(a.grid() == grid) || !(b.grid() == grid)) throw std::invalid_argument("conformal factor grid mismatch");
}

// |A^{1/2} w|^p per grid point, without the conformal factor.
std::vector<double> plain_density(const EnergyOperator& op, const Field& u) {
  const EnergyOperator bare = op.with_conformal(std::nullopt);
  return bare.density(bare.half_laplacian(u));
}

double lower_weight(double s1, double s2, double p) {
  const double q = 1.0 / (p - 1.0);
  return (p - 1.0) * s2 / std::pow(s1, q) * (std::pow(s1, q) - std::pow(s2, q));
}

bool is_zero(const Field& u) {
  const auto v = u.values();
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

struct ProbeSet {
  std::vector<double> values;
  std::vector<double> errors;
};

ProbeSet simulate(const DomainMask& mask, const EnergyOperator& op, const SolverOptions& solver,
                  const std::vector<TraceDatum>& probes) {
  DnContext ctx(mask, op, solver);
  ProbeSet out;
  out.values.resize(probes.size());
  out.errors.resize(probes.size());
  parallel_for(probes.size(), [&](std::size_t k) {
    out.values[k] = dn_pair(ctx, probes[k], probes[k]);
    out.errors[k] = dn_pair_error_bound(ctx, probes[k], out.values[k]);
  });
  return out;
}

}  // namespace

MeasurementOracle::MeasurementOracle(DomainMask mask, AnisotropyField A, double s, double p,
                                     ConformalCoefficient sigma, SolverOptions options)
    : ctx_(std::move(mask), EnergyOperator(std::move(A), s, p, std::move(sigma)), std::move(options)) {}

DnMeasurement MeasurementOracle::measure(const TraceDatum& u0, double noise, std::uint64_t seed) {
  if (noise < 0.0 || noise >= 1.0) throw std::invalid_argument("MeasurementOracle: noise must lie in [0, 1)");
  const std::size_t before = ctx_.cache_size();
  DnMeasurement m(u0.field());
  const double clean = dn_pair(ctx_, u0, u0);
  m.error = dn_pair_error_bound(ctx_, u0, clean);
  solves_ += ctx_.cache_size() - before;
  m.noise = noise;
  m.seed = seed;
  double zeta = 0.0;
  if (noise > 0.0) {
    std::mt19937_64 rng(seed);
    zeta = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  }
  m.value = clean * (1.0 + noise * zeta);
  return m;
}

GapResult dn_gap(const TraceDatum& u0, const ConformalCoefficient& sigma1, const ConformalCoefficient& sigma2,
                 const AnisotropyField& A, const DomainMask& mask, double s, double p,
                 const SolverOptions& options) {
  require_floor(sigma1, sigma2, mask.grid());
  DnContext c1(mask, EnergyOperator(A, s, p, sigma1), options);
  DnContext c2(mask, EnergyOperator(A, s, p, sigma2), options);
  GapResult g;
  g.value1 = dn_pair(c1, u0, u0);
  g.value2 = dn_pair(c2, u0, u0);
  g.gap = g.value1 - g.value2;
  g.slack = 10.0 * (dn_pair_error_bound(c1, u0, g.value1) + dn_pair_error_bound(c2, u0, g.value2));
  return g;
}

SandwichResult monotonicity_bounds(const TraceDatum& u0, const ConformalCoefficient& sigma1,
                                   const ConformalCoefficient& sigma2, const AnisotropyField& A,
                                   const DomainMask& mask, double s, double p,
                                   const SolverOptions& options) {
  require_floor(sigma1, sigma2, mask.grid());
  const EnergyOperator op2(A, s, p, sigma2);
  DnContext c1(mask, EnergyOperator(A, s, p, sigma1), options);
  DnContext c2(mask, op2, options);
  const double v1 = dn_pair(c1, u0, u0);
  const double v2 = dn_pair(c2, u0, u0);
  const std::vector<double> rho = plain_density(op2, c2.solve(u0).solution);
  const double vol = mask.grid().cell_volume();

  SandwichResult r;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    r.lower += lower_weight(sigma1[i], sigma2[i], p) * rho[i];
    r.upper += (sigma1[i] - sigma2[i]) * rho[i];
  }
  r.lower *= vol;
  r.upper *= vol;
  r.gap = v1 - v2;
  r.slack = 10.0 * (dn_pair_error_bound(c1, u0, v1) + dn_pair_error_bound(c2, u0, v2));
  return r;
}

double beta_lower_bound(double beta, const ConformalCoefficient& sigma1, const ConformalCoefficient& sigma2,
                        std::span<const double> density, double p, double cell_volume) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta_lower_bound: beta must be positive");
  const double pc = p / (p - 1.0);
  const double q = 1.0 / (p - 1.0);
  const double c = std::pow(1.0 + beta, pc) * std::pow(p, -q) / pc;
  double sum = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double s1 = sigma1[i];
    const double s2 = sigma2[i];
    sum += (beta * s2 - c * std::pow(s2, pc) / std::pow(s1, q)) * density[i];
  }
  return sum * cell_volume;
}

BetaScan beta_scan(const ConformalCoefficient& sigma1, const ConformalCoefficient& sigma2,
                   std::span<const double> density, double p, double cell_volume, double half_width,
                   double step) {
  if (!(step > 0.0) || !(half_width >= 0.0)) throw std::invalid_argument("beta_scan: bad scan range");
  BetaScan out;
  const int k = static_cast<int>(std::floor(half_width / step + 1e-9));
  double best = -std::numeric_limits<double>::infinity();
  for (int j = -k; j <= k; ++j) {
    const double beta = (p - 1.0) + j * step;
    if (beta <= 0.0) continue;
    const double v = beta_lower_bound(beta, sigma1, sigma2, density, p, cell_volume);
    out.betas.push_back(beta);
    out.values.push_back(v);
    if (v > best) {
      best = v;
      out.argmax = beta;
    }
  }
  return out;
}

BlockPartition tile_blocks(const GridSpec& grid, IndexBox box, int b) {
  if (b <= 0) throw std::invalid_argument("tile_blocks: block size must be positive");
  const int N = grid.points_per_axis();
  if (grid.dim() == 1) {
    box.j0 = 0;
    box.j1 = 1;
  }
  const int bj = grid.dim() == 1 ? 1 : b;
  if (box.i0 < 0 || box.i1 > N || box.j0 < 0 || box.j1 > (grid.dim() == 1 ? 1 : N) ||
      (box.i1 - box.i0) % b != 0 || (box.j1 - box.j0) % bj != 0) {
    throw std::invalid_argument("tile_blocks: block size must divide the box extents");
  }
  BlockPartition out;
  for (int i = box.i0; i < box.i1; i += b) {
    for (int j = box.j0; j < box.j1; j += bj) {
      std::vector<std::size_t> pts;
      for (int a = i; a < i + b; ++a) {
        for (int c = j; c < j + bj; ++c) pts.push_back(grid.flat_index(a, c));
      }
      out.blocks.push_back(std::move(pts));
    }
  }
  return out;
}

SingleMeasurementReport single_measurement_experiment(const ConformalCoefficient& sigma1,
                                                      const ConformalCoefficient& sigma2,
                                                      const AnisotropyField& A, const DomainMask& mask,
                                                      double s, double p, const Field& u0,
                                                      const BlockPartition& blocks,
                                                      const SolverOptions& options) {
  require_floor(sigma1, sigma2, mask.grid());
  const TraceDatum datum(u0, mask);
  if (is_zero(datum.field())) throw std::invalid_argument("single_measurement_experiment: datum is zero");
  bool equal = true;
  for (std::size_t i = 0; i < mask.grid().size(); ++i) {
    if (sigma1[i] < sigma2[i]) throw std::invalid_argument("single_measurement_experiment: needs sigma1 >= sigma2");
    if (sigma1[i] != sigma2[i]) equal = false;
  }

  const SandwichResult sw = monotonicity_bounds(datum, sigma1, sigma2, A, mask, s, p, options);
  SingleMeasurementReport r;
  r.gap = sw.gap;
  r.lower = sw.lower;
  r.upper = sw.upper;
  r.slack = sw.slack;
  r.coefficients_equal = equal;
  r.gap_positive = sw.gap > sw.slack;

  const EnergyOperator op2(A, s, p, sigma2);
  const Field u2 = solve_exterior_value(datum.field(), mask, op2, options).solution;
  const std::vector<double> rho = plain_density(op2, u2);
  const double vol = mask.grid().cell_volume();
  bool any_flag = false;
  for (const auto& block : blocks.blocks) {
    double weight = 0.0;
    double share = 0.0;
    bool contrast = false;
    for (std::size_t i : block) {
      weight += rho[i];
      share += lower_weight(sigma1[i], sigma2[i], p) * rho[i];
      contrast = contrast || sigma1[i] > sigma2[i];
    }
    const bool flagged = contrast && share * vol > sw.slack;
    r.block_weight.push_back(weight * vol);
    r.block_contrast.push_back(contrast);
    r.block_flagged.push_back(flagged);
    any_flag = any_flag || flagged;
  }

  if (equal) {
    r.verified = std::abs(sw.gap) <= sw.slack && !any_flag;
  } else {
    r.verified = sw.lower > sw.slack && sw.gap >= sw.lower - sw.slack && r.gap_positive;
  }
  return r;
}

std::vector<bool> detectable_blocks(const ConformalCoefficient& sigma2, const AnisotropyField& A,
                                    const DomainMask& mask, double s, double p, const Field& u0,
                                    const BlockPartition& blocks, double contrast, double slack,
                                    const SolverOptions& options) {
  if (!(contrast > 0.0)) throw std::invalid_argument("detectable_blocks: contrast must be positive");
  const TraceDatum datum(u0, mask);
  if (is_zero(datum.field())) throw std::invalid_argument("detectable_blocks: datum is zero");
  const EnergyOperator op2(A, s, p, sigma2);
  const Field u2 = solve_exterior_value(datum.field(), mask, op2, options).solution;
  const std::vector<double> rho = plain_density(op2, u2);
  const double vol = mask.grid().cell_volume();
  std::vector<bool> out;
  for (const auto& block : blocks.blocks) {
    double share = 0.0;
    for (std::size_t i : block) share += lower_weight(sigma2[i] + contrast, sigma2[i], p) * rho[i];
    out.push_back(share * vol > slack);
  }
  return out;
}

ConformalCoefficient SigmaEstimate::field(const GridSpec& grid, const BlockPartition& blocks,
                                          double background) const {
  std::vector<double> v(grid.size(), background);
  for (std::size_t b = 0; b < blocks.blocks.size() && b < estimate.size(); ++b) {
    for (std::size_t i : blocks.blocks[b]) v[i] = estimate[b];
  }
  double floor = background;
  for (double e : estimate) floor = std::min(floor, e);
  return ConformalCoefficient(grid, std::move(v), floor);
}

SigmaEstimate reconstruct_sigma(MeasurementOracle& oracle, const std::vector<TraceDatum>& probes,
                                const BlockPartition& blocks, const std::vector<double>& levels,
                                const DomainMask& mask, const AnisotropyField& A, double s, double p,
                                const SolverOptions& solver, const ReconstructionOptions& options) {
  if (levels.empty() || !std::is_sorted(levels.begin(), levels.end()) ||
      std::adjacent_find(levels.begin(), levels.end()) != levels.end() || !(levels.front() > 0.0)) {
    throw std::invalid_argument("reconstruct_sigma: levels must be positive and strictly increasing");
  }
  if (probes.empty()) throw std::invalid_argument("reconstruct_sigma: no probes");
  const GridSpec& grid = mask.grid();
  const std::size_t nb = blocks.blocks.size();
  const double background = levels.front();

  SigmaEstimate est;
  std::vector<double> measured(probes.size());
  for (std::size_t k = 0; k < probes.size(); ++k) {
    est.measurements.push_back(oracle.measure(probes[k], options.noise, options.noise_seed + k));
    measured[k] = est.measurements.back().value;
  }

  // Admissible level indices per block form the range [lo, hi].
  std::vector<int> lo(nb, 0);
  std::vector<int> hi(nb, static_cast<int>(levels.size()) - 1);
  std::map<std::vector<int>, ProbeSet> cache;
  const EnergyOperator base(A, s, p);

  auto simulated = [&](const std::vector<int>& assignment) -> const ProbeSet* {
    auto it = cache.find(assignment);
    if (it != cache.end()) return &it->second;
    if (cache.size() >= options.budget) {
      est.budget_exhausted = true;
      return nullptr;
    }
    std::vector<double> tau(grid.size(), background);
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t i : blocks.blocks[b]) tau[i] = levels[assignment[b]];
    }
    const ConformalCoefficient coeff(grid, std::move(tau), background);
    return &cache.emplace(assignment, simulate(mask, base.with_conformal(coeff), solver, probes)).first->second;
  };

  // Returns +1 when the test excludes the level, 0 when it keeps it, -1 when out of budget.
  auto run_test = [&](std::size_t b, int level, bool above) -> int {
    std::vector<int> assignment = above ? lo : hi;
    assignment[b] = level;
    const ProbeSet* sim = simulated(assignment);
    if (sim == nullptr) return -1;
    double stat = above ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    bool refuted = false;
    double worst_slack = 0.0;
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const double diff = measured[k] - sim->values[k];
      const double noise_band = options.noise * std::abs(measured[k]) / (1.0 - options.noise);
      const double slack =
          options.slack_factor * (est.measurements[k].error + sim->errors[k]) + noise_band;
      worst_slack = std::max(worst_slack, slack);
      stat = above ? std::min(stat, diff) : std::max(stat, diff);
      if (above ? diff < -slack : diff > slack) refuted = true;
    }
    est.ledger.push_back(LedgerRow{b, levels[level], above ? "above" : "below", stat, worst_slack,
                                   refuted ? "excluded" : "kept"});
    return refuted ? 1 : 0;
  };

  bool changed = true;
  while (changed && !est.budget_exhausted) {
    changed = false;
    for (std::size_t b = 0; b < nb && !est.budget_exhausted; ++b) {
      // sigma >= tau on every probe would force measured - simulated >= -slack.
      while (hi[b] > lo[b]) {
        const int verdict = run_test(b, hi[b], true);
        if (verdict != 1) break;
        --hi[b];
        changed = true;
      }
      while (lo[b] < hi[b] && !est.budget_exhausted) {
        const int verdict = run_test(b, lo[b], false);
        if (verdict != 1) break;
        ++lo[b];
        changed = true;
      }
    }
  }

  est.simulations = cache.size();
  for (std::size_t b = 0; b < nb; ++b) {
    est.lower.push_back(levels[lo[b]]);
    est.upper.push_back(levels[hi[b]]);
    est.estimate.push_back(0.5 * (levels[lo[b]] + levels[hi[b]]));
    if (lo[b] != hi[b]) est.inconclusive.push_back(b);
  }
  return est;
}

Field bump_field(const GridSpec& grid, double ci, double cj, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("bump_field: radius must be positive");
  Field f(grid, 1);
  const int N = grid.points_per_axis();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto idx = grid.multi_index(k);
    auto wrap = [N](double d) { return d - N * std::round(d / N); };
    const double di = wrap(idx[0] - ci);
    const double dj = grid.dim() == 2 ? wrap(idx[1] - cj) : 0.0;
    const double r = std::hypot(di, dj) / radius;
    if (r < 1.0) {
      const double c = std::cos(0.5 * std::numbers::pi * r);
      f(k) = c * c;
    }
  }
  return f;
}

std::vector<Field> window_probes(const GridSpec& grid, const std::vector<std::size_t>& window, int count,
                                 double radius, std::uint64_t seed) {
  if (window.empty() || count <= 0) throw std::invalid_argument("window_probes: empty window or count");
  std::vector<std::uint8_t> inside(grid.size(), 0);
  for (std::size_t i : window) inside.at(i) = 1;
  std::mt19937_64 rng(seed);
  std::vector<Field> out;
  // Stratify the window by its enumeration order so probes spread out.
  for (int k = 0; k < count; ++k) {
    const std::size_t lo = window.size() * k / count;
    const std::size_t hi = std::max(lo + 1, window.size() * (k + 1) / count);
    std::uniform_int_distribution<std::size_t> pick(lo, hi - 1);
    const auto c = grid.multi_index(window[pick(rng)]);
    Field f = bump_field(grid, c[0], c[1], radius);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!inside[i]) f(i) = 0.0;
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace fpb
