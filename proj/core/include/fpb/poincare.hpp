#pragma once

/// @file poincare.hpp
/// @brief Optimal discrete fractional Poincare constant and the first
/// eigenpair of the fractional p-biharmonic eigenproblem.

#include <cstdint>
#include <string>
#include <vector>

#include "fpb/solver.hpp"

namespace fpb {

struct PoincareOptions {
  double tol = 1e-8;                ///< bound on the Euler-Lagrange residual
  int restarts = 5;
  std::uint64_t seed = 20240611;    ///< restart k uses seed + k
  std::size_t budget = 0;           ///< iterations per restart; 0 means 10 * N^n
  int memory = 10;
  int residual_directions = 32;
};

struct RestartOutcome {
  std::uint64_t seed = 0;
  double value = 0.0;
  double residual = 0.0;
  bool converged = false;
};

struct PoincareResult {
  double lambda1 = 0.0;             ///< min over restarts of |(-Delta)^{s/2}u|_p^p, |u|_p = 1
  double c_star = 0.0;              ///< lambda1^{-1/p}
  Field minimizer;
  double residual = 0.0;            ///< Euler-Lagrange residual of the minimizer
  bool converged = false;
  std::string message;
  std::vector<RestartOutcome> restarts;
  std::vector<double> distinct_values;  ///< restart limits that differ by more than 1e-6 relative

  explicit PoincareResult(Field u) : minimizer(std::move(u)) {}
};

/// Minimizes the Rayleigh quotient |(-Delta)^{s/2}u|_p^p / |u|_p^p over
/// interior-supported scalar fields, renormalizing onto the unit L^p sphere
/// after every step.
PoincareResult poincare_eigenpair(const DomainMask& mask, double s, double p,
                                  const PoincareOptions& options = {});

/// Max over random interior directions v of
/// |int |w|^{p-2} w (-Delta)^{s/2} v - mu int |u|^{p-2} u v| / |v|_L1, with u
/// rescaled to unit L^p norm.
double eigen_residual(const Field& u, double mu, const DomainMask& mask, double s, double p,
                      int directions = 32, std::uint64_t seed = 11);

/// True iff mu >= lambda1 - slack with slack = 1e-8 * lambda1 + 10 * tol.
/// Rejects the zero field and fields not supported in the interior. The
/// five-argument form computes lambda1 with default options.
bool rayleigh_lower_bound_check(const Field& v, double mu, const DomainMask& mask,
                                const PoincareResult& reference, double tol = 1e-8);
bool rayleigh_lower_bound_check(const Field& v, double mu, const DomainMask& mask, double s, double p);

/// |(-Delta)^{s/2}u|_p^p / |u|_p^p.
double rayleigh_quotient(const Field& u, double s, double p);

}  // namespace fpb
