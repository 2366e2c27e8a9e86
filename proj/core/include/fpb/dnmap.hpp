#pragma once

/// @file dnmap.hpp
/// @brief Discrete exterior Dirichlet-to-Neumann map.
///
/// Exterior data are represented by their extension by zero into the
/// interior. Pairings <Lambda f, g> are evaluated as the energy pairing of the
/// exterior-value solution u_f against a full-grid representative of g.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fpb/solver.hpp"

namespace fpb {

/// Exterior datum stored as a full field whose interior entries are zero.
class TraceDatum {
 public:
  /// Copies the exterior values of u; interior entries are set to zero.
  TraceDatum(const Field& u, const DomainMask& mask);

  const Field& field() const { return field_; }
  const GridSpec& grid() const { return field_.grid(); }

 private:
  Field field_;
};

/// Mask, operator and solver settings, plus a thread-safe cache of solved
/// exterior problems keyed by the datum.
class DnContext {
 public:
  DnContext(DomainMask mask, EnergyOperator op, SolverOptions options = {});

  const DomainMask& mask() const { return mask_; }
  const EnergyOperator& op() const { return op_; }
  const SolverOptions& options() const { return options_; }

  /// Solution of the exterior problem with datum f (cached).
  const SolveReport& solve(const TraceDatum& f);
  std::size_t cache_size() const;

 private:
  struct Entry {
    Field datum;
    std::shared_ptr<const SolveReport> report;
  };

  DomainMask mask_;
  EnergyOperator op_;
  SolverOptions options_;
  mutable std::mutex mutex_;
  std::multimap<std::uint64_t, Entry> cache_;
};

/// <Lambda f, g> = pairing(u_f, g) with g taken as given on the full grid
/// (interior entries of g are part of the representative). Throws
/// std::runtime_error when the exterior solve fails.
double dn_pair(DnContext& ctx, const TraceDatum& f, const Field& g);
double dn_pair(DnContext& ctx, const TraceDatum& f, const TraceDatum& g);

/// Upper bound on the error of dn_pair(ctx, f, g) caused by the solver
/// residual: residual_sup(u_f) * |u_f - f|_L1(Omega) + 1e-13 |value| style
/// round-off allowance.
double dn_pair_error_bound(DnContext& ctx, const TraceDatum& f, double value);

struct QuotientCheck {
  double deviation = 0.0;  ///< |dn_pair(f, g + phi) - dn_pair(f, g)|
  double slack = 0.0;      ///< residual_sup(u_f) * |phi|_L1 plus round-off
};

/// Perturbs the representative of g by an interior-supported phi.
QuotientCheck quotient_independence_check(DnContext& ctx, const TraceDatum& f, const TraceDatum& g,
                                          const Field& phi);

/// Dense matrix M_ij = <Lambda e_i, e_j> over exterior degrees of freedom
/// (point-major, component-minor). Only for p = 2.
Eigen::MatrixXd dn_matrix_linear(DnContext& ctx);

}  // namespace fpb
