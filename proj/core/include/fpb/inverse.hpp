#pragma once

/// @file inverse.hpp
/// @brief Conformal-coefficient inverse problem: DN gaps between two
/// conformal factors, the two-sided monotonicity bounds, single-measurement
/// experiments and a certified level-scan reconstruction.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fpb/dnmap.hpp"

namespace fpb {

/// One DN measurement <Lambda_sigma u0, u0>, optionally perturbed to
/// value * (1 + eta * zeta) with zeta uniform in [-1, 1].
struct DnMeasurement {
  Field datum;           ///< exterior datum (interior entries zero)
  double value = 0.0;
  double error = 0.0;    ///< solver-induced error bound of the clean value
  double noise = 0.0;    ///< eta
  std::uint64_t seed = 0;

  explicit DnMeasurement(Field f) : datum(std::move(f)) {}
};

/// Answers DN measurements for a hidden conformal factor.
class MeasurementOracle {
 public:
  MeasurementOracle(DomainMask mask, AnisotropyField A, double s, double p, ConformalCoefficient sigma,
                    SolverOptions options = {});

  DnMeasurement measure(const TraceDatum& u0, double noise = 0.0, std::uint64_t seed = 0);
  std::size_t forward_solves() const { return solves_; }

 private:
  DnContext ctx_;
  std::size_t solves_ = 0;
};

struct GapResult {
  double gap = 0.0;      ///< <(Lambda_1 - Lambda_2) u0, u0>
  double slack = 0.0;    ///< 10 x the summed solver error bounds
  double value1 = 0.0;
  double value2 = 0.0;
};

GapResult dn_gap(const TraceDatum& u0, const ConformalCoefficient& sigma1, const ConformalCoefficient& sigma2,
                 const AnisotropyField& A, const DomainMask& mask, double s, double p,
                 const SolverOptions& options = {});

struct SandwichResult {
  double lower = 0.0;
  double gap = 0.0;
  double upper = 0.0;
  double slack = 0.0;
  bool holds() const { return lower - slack <= gap && gap <= upper + slack; }
};

/// lower = (p-1) int sigma2 sigma1^{-1/(p-1)} (sigma1^{1/(p-1)} - sigma2^{1/(p-1)}) |A^{1/2} w2|^p,
/// upper = int (sigma1 - sigma2) |A^{1/2} w2|^p, w2 = (-Delta)^{s/2} u2 with u2 the
/// sigma2-solution of the exterior problem.
SandwichResult monotonicity_bounds(const TraceDatum& u0, const ConformalCoefficient& sigma1,
                                   const ConformalCoefficient& sigma2, const AnisotropyField& A,
                                   const DomainMask& mask, double s, double p,
                                   const SolverOptions& options = {});

/// Pointwise-integrated lower bound family indexed by beta > 0:
/// int (beta sigma2 - (1/p') (1+beta)^{p'} p^{-1/(p-1)} sigma2^{p'} sigma1^{-1/(p-1)}) rho,
/// with rho = |A^{1/2} w2|^p per grid point. Equals the lower bound above at beta = p - 1.
double beta_lower_bound(double beta, const ConformalCoefficient& sigma1, const ConformalCoefficient& sigma2,
                        std::span<const double> density, double p, double cell_volume);

struct BetaScan {
  std::vector<double> betas;
  std::vector<double> values;
  double argmax = 0.0;
};

/// Evaluates beta_lower_bound on p-1 + k*step for |k*step| <= half_width.
BetaScan beta_scan(const ConformalCoefficient& sigma1, const ConformalCoefficient& sigma2,
                   std::span<const double> density, double p, double cell_volume, double half_width = 0.2,
                   double step = 0.01);

/// Grid points grouped into blocks.
struct BlockPartition {
  std::vector<std::vector<std::size_t>> blocks;
};

/// Tiles the index box [i0, i1) x [j0, j1) with b x b blocks (b divides the extents).
BlockPartition tile_blocks(const GridSpec& grid, IndexBox box, int b);

struct SingleMeasurementReport {
  double gap = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double slack = 0.0;
  bool coefficients_equal = false;
  bool gap_positive = false;              ///< gap > slack
  bool verified = false;                  ///< the expected conclusion holds
  std::vector<double> block_weight;       ///< int_B |A^{1/2} w2|^p per block
  std::vector<bool> block_contrast;       ///< sigma1 > sigma2 somewhere on the block
  std::vector<bool> block_flagged;        ///< contrast block whose lower-bound share exceeds slack
};

/// Single-measurement experiment with sigma1 >= sigma2. For equal factors the
/// gap must stay within slack. Otherwise the lower bound must exceed the
/// slack and the measured gap must dominate it (up to slack).
SingleMeasurementReport single_measurement_experiment(const ConformalCoefficient& sigma1,
                                                      const ConformalCoefficient& sigma2,
                                                      const AnisotropyField& A, const DomainMask& mask,
                                                      double s, double p, const Field& u0,
                                                      const BlockPartition& blocks,
                                                      const SolverOptions& options = {});

/// Blocks B where a unit contrast on B would be detected from datum u0:
/// the lower-bound weight of sigma2 + contrast against sigma2 exceeds slack.
std::vector<bool> detectable_blocks(const ConformalCoefficient& sigma2, const AnisotropyField& A,
                                    const DomainMask& mask, double s, double p, const Field& u0,
                                    const BlockPartition& blocks, double contrast, double slack,
                                    const SolverOptions& options = {});

struct ReconstructionOptions {
  std::size_t budget = 4000;       ///< max distinct test coefficients simulated
  double noise = 0.0;              ///< eta applied to the measurements
  std::uint64_t noise_seed = 1;
  double slack_factor = 10.0;
};

struct LedgerRow {
  std::size_t block = 0;
  double level = 0.0;
  std::string test;                ///< "above" or "below"
  double statistic = 0.0;          ///< min (above) or max (below) of measured - simulated
  double slack = 0.0;
  std::string verdict;             ///< "excluded" or "kept"
};

struct SigmaEstimate {
  std::vector<double> lower;       ///< smallest admissible level per block
  std::vector<double> upper;       ///< largest admissible level per block
  std::vector<double> estimate;    ///< interval midpoint
  std::vector<std::size_t> inconclusive;
  std::vector<LedgerRow> ledger;
  std::size_t simulations = 0;
  bool budget_exhausted = false;
  std::vector<DnMeasurement> measurements;

  /// Background value outside the blocks, estimate inside.
  ConformalCoefficient field(const GridSpec& grid, const BlockPartition& blocks, double background) const;
};

/// Level scan over blocks under the prior that sigma is constant on each
/// block with values in `levels` and equals levels.front() outside the
/// blocks. Each exclusion is certified by a sign test of measured minus
/// simulated DN data: sigma >= tau forces a nonnegative difference and
/// sigma <= tau a nonpositive one (up to slack).
SigmaEstimate reconstruct_sigma(MeasurementOracle& oracle, const std::vector<TraceDatum>& probes,
                                const BlockPartition& blocks, const std::vector<double>& levels,
                                const DomainMask& mask, const AnisotropyField& A, double s, double p,
                                const SolverOptions& solver, const ReconstructionOptions& options = {});

/// Smooth bump cos^2 profile of the given radius (index units) centered at
/// grid index (ci, cj).
Field bump_field(const GridSpec& grid, double ci, double cj, double radius);

/// `count` bumps centered at random points of the window (a set of grid
/// points), drawn with a seeded generator; each bump is restricted to the window.
std::vector<Field> window_probes(const GridSpec& grid, const std::vector<std::size_t>& window, int count,
                                 double radius, std::uint64_t seed);

}  // namespace fpb
