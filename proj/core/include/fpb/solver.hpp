#pragma once

/// @file solver.hpp
/// @brief Forward solvers for the interior-source and exterior-value problems
/// of the fractional p-biharmonic operator, posed as convex minimization over
/// the interior degrees of freedom.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fpb/energy_ops.hpp"
#include "fpb/grid_spectral.hpp"

namespace fpb {

/// Index-space box [i0, i1) x [j0, j1) (j ignored in one dimension).
struct IndexBox {
  int i0 = 0, i1 = 0;
  int j0 = 0, j1 = 1;
};

/// Partition of the grid into the interior Omega and its exterior.
class DomainMask {
 public:
  DomainMask(GridSpec grid, std::vector<std::uint8_t> interior);
  /// Union of index boxes.
  static DomainMask boxes(const GridSpec& grid, const std::vector<IndexBox>& boxes);

  const GridSpec& grid() const { return grid_; }
  bool interior(std::size_t point) const { return interior_[point] != 0; }
  std::span<const std::uint8_t> bits() const { return interior_; }
  const std::vector<std::size_t>& interior_points() const { return interior_points_; }
  const std::vector<std::size_t>& exterior_points() const { return exterior_points_; }
  std::size_t interior_count() const { return interior_points_.size(); }
  std::size_t exterior_count() const { return exterior_points_.size(); }

  /// True when every interior point of this mask is interior in `other`.
  bool subset_of(const DomainMask& other) const;

 private:
  GridSpec grid_;
  std::vector<std::uint8_t> interior_;
  std::vector<std::size_t> interior_points_;
  std::vector<std::size_t> exterior_points_;
};

/// Copies u and zeroes it on the exterior.
Field restrict_to_interior(const Field& u, const DomainMask& mask);
/// Copies u and zeroes it on the interior.
Field restrict_to_exterior(const Field& u, const DomainMask& mask);

struct SolverOptions {
  double tol = 1e-8;                 ///< sup-norm bound on the weak residual
  std::size_t budget = 0;            ///< total optimizer iterations; 0 means 10 * N^n
  std::vector<double> eps_schedule;  ///< empty: {1e-2, 1e-4, 1e-6, 0} for p < 2, {0} otherwise
  int memory = 10;
  std::uint64_t residual_seed = 7;   ///< seed of the random residual test directions
  int residual_directions = 32;
  std::optional<Field> initial;      ///< interior starting values (exterior ignored)
};

struct SolveReport {
  Field solution;
  double energy = 0.0;               ///< objective at the solution (p-energy minus source term)
  double gradient_norm = 0.0;        ///< sup norm of the exact-operator residual
  std::size_t iterations = 0;
  double wall_seconds = 0.0;
  double epsilon = 0.0;              ///< smoothing of the final stage
  double residual = 0.0;             ///< max over random interior directions v of |r(v)| / |v|_L1
  bool converged = false;
  std::string message;
  std::vector<double> energy_history;

  explicit SolveReport(Field u) : solution(std::move(u)) {}
};

/// Minimizes E(u) - <F, u> over fields vanishing on the exterior.
SolveReport solve_interior_source(const Field& F, const DomainMask& mask, const EnergyOperator& op,
                                  const SolverOptions& options = {});
SolveReport solve_interior_source(const Field& F, const DomainMask& mask, const AnisotropyField& A,
                                  double s, double p, double tol);

/// Minimizes E(u) over fields agreeing with u0 on the exterior.
SolveReport solve_exterior_value(const Field& u0, const DomainMask& mask, const EnergyOperator& op,
                                 const SolverOptions& options = {});
SolveReport solve_exterior_value(const Field& u0, const DomainMask& mask, const AnisotropyField& A,
                                 double s, double p, double tol);

/// Weak residual r(v) = <apply(u), v> - <F, v> tested against random
/// interior-supported directions, each normalized by its grid L1 norm.
double weak_residual(const Field& u, const Field* F, const DomainMask& mask, const EnergyOperator& op,
                     int directions, std::uint64_t seed);

/// Sup norm over interior points of apply(u) - F (F may be null).
double residual_sup(const Field& u, const Field* F, const DomainMask& mask, const EnergyOperator& op);

enum class ProblemKind { InteriorSource, ExteriorValue };

struct UniquenessReport {
  double max_distance = 0.0;         ///< max over pairs of |(-Delta)^{s/2}(u_i - u_j)|_p
  double slack = 0.0;                ///< 10 * tol^{1 / max(p - 1, 1)} times the solution scale
  std::vector<SolveReport> solves;
  bool within_slack() const { return max_distance <= slack; }
};

/// Solves the same problem from random interior initializations (one per
/// seed) and measures the spread of the results.
UniquenessReport uniqueness_probe(const DomainMask& mask, const EnergyOperator& op, const Field& data,
                                  ProblemKind kind, const std::vector<std::uint64_t>& seeds,
                                  const SolverOptions& options = {});

}  // namespace fpb
