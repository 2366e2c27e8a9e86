#pragma once

/// @file oracles.hpp
/// @brief Independent reference computations used by the tests and the
/// acceptance suite. Dense matrices are assembled from explicit cosine sums
/// (no FFT), kernel norms come from adaptive quadrature.

#include <optional>

#include <Eigen/Dense>

#include "fpb/dnmap.hpp"
#include "fpb/energy_ops.hpp"
#include "fpb/solver.hpp"

namespace fpb::verification {

/// Dense matrix of (-Delta)^{t} on the grid: entry (i, j) equals
/// (1/N^n) sum_k |xi_k|^{2t} cos(xi_k . (x_i - x_j)).
Eigen::MatrixXd dense_multiplier(const GridSpec& grid, double t);

/// Matrix of the linear (p = 2, A = identity, m = 1) operator
/// H diag(sigma) H with H = (-Delta)^{s/2}.
Eigen::MatrixXd dense_linear_operator(const GridSpec& grid, double s,
                                      const std::optional<ConformalCoefficient>& sigma = std::nullopt);

/// Solution of K_II u_I = F_I with zero exterior values.
Field dense_interior_source(const Field& F, const DomainMask& mask, const Eigen::MatrixXd& K);
/// Solution of K_II u_I = -K_IE u0_E with u = u0 on the exterior.
Field dense_exterior_value(const Field& u0, const DomainMask& mask, const Eigen::MatrixXd& K);

/// cellvol * (K_EE - K_EI K_II^{-1} K_IE) over the exterior points.
Eigen::MatrixXd dense_dn_matrix(const DomainMask& mask, const Eigen::MatrixXd& K);

/// Smallest eigenvalue of K_II (the linear Rayleigh quotient minimum).
double dense_first_eigenvalue(const DomainMask& mask, const Eigen::MatrixXd& K);

/// int_{R^n} P(x, y)^q dx by double-exponential quadrature in the radial variable.
double quadrature_kernel_lq_norm(int n, double s, double q, double y);

/// Analytic calibration constant of the weighted normal trace against the
/// fractional Laplacian: 4^s Gamma(1 + s) / (2 s Gamma(1 - s)).
double analytic_trace_calibration(double s);

}  // namespace fpb::verification
