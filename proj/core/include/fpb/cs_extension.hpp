#pragma once

/// @file cs_extension.hpp
/// @brief The degenerate-elliptic (Caffarelli-Silvestre) extension: Poisson
/// kernel, its exact L^q norms, extension by periodic convolution and
/// recovery of the fractional Laplacian from the weighted normal trace.

#include <array>
#include <string>
#include <vector>

#include "fpb/grid_spectral.hpp"

namespace fpb {

/// Kernel P(x, y) = y^{2s} / (|x|^2 + y^2)^{(n+2s)/2} on R^n x (0, inf).
class PoissonKernelSpec {
 public:
  PoissonKernelSpec(int n, double s);

  int dim() const { return n_; }
  double s() const { return s_; }
  /// Surface measure of the unit sphere in R^n: 2 pi^{n/2} / Gamma(n/2).
  double omega() const;
  /// C_{n,s} = 1 / |P(., 1)|_{L^1(R^n)}.
  double normalization() const;

 private:
  int n_;
  double s_;
};

/// P(x, y); only the first n coordinates of x are used.
double poisson_kernel(std::array<double, 2> x, double y, const PoissonKernelSpec& spec);

/// d/dy P(x, y) in closed form.
double poisson_kernel_dy(std::array<double, 2> x, double y, const PoissonKernelSpec& spec);

/// |P(., y)|_{L^q(R^n)} = ((omega_n / 2) y^{n(1-q)} B(n/2, n(q-1)/2 + s q))^{1/q}.
double kernel_lq_norm(double y, double q, const PoissonKernelSpec& spec);

struct ExtensionOptions {
  int images = -1;  ///< periodic images per side; -1 picks 2000 in 1-d and 12 in 2-d
};

struct ExtensionSlices {
  std::vector<double> heights;   ///< strictly increasing
  std::vector<Field> slices;     ///< U(., heights[j])
  Field base;
  double s = 0.5;
  /// Mass of the normalized kernel outside the fundamental period cell.
  std::vector<double> tail_mass;
  bool support_warning = false;  ///< period shorter than 8 x the support diameter
  std::string warning;

  explicit ExtensionSlices(Field u) : base(std::move(u)) {}
};

/// Heights y0 * r^j, j = 0 .. count-1.
std::vector<double> geometric_heights(double y0, double r, int count);

/// U(., y) = C_{n,s} P(., y) * u by discrete periodic convolution with the
/// periodized kernel sampled on the grid and renormalized to unit sum.
ExtensionSlices extend(const Field& u, std::vector<double> heights, const PoissonKernelSpec& spec,
                       const ExtensionOptions& options = {});

/// Circular diameter of {|u| > 1e-8 max|u|}.
double support_diameter(const Field& u);

struct HalfSpacePoint {
  std::array<double, 2> x{0.0, 0.0};
  double y = 1.0;
};

/// Max over the sample points of |Delta_x P + P_yy + ((1-2s)/y) P_y| / P with
/// central differences of step h.
double pde_residual_check(const PoissonKernelSpec& spec, const std::vector<HalfSpacePoint>& points,
                          double h);

/// Max of |P_y| (|x|^2 + y^2)^{(n+2s)/2} / y^{2s-1} over the sample points.
double kernel_derivative_constant(const PoissonKernelSpec& spec, const std::vector<HalfSpacePoint>& points);

struct NormalTraceOptions {
  /// Number of expansion terms removed by extrapolation (capped at heights - 2).
  int richardson_terms = 4;
};

struct NormalTrace {
  Field trace;                   ///< T = -lim y^{1-2s} dU/dy
  double calibration = 0.0;      ///< c minimizing |c T - (-Delta)^s u|_2
  double relative_error = 0.0;   ///< |c T - (-Delta)^s u|_2 / |(-Delta)^s u|_2
  double exponent = 0.0;         ///< leading error exponent inferred from the two lowest differences

  explicit NormalTrace(Field t) : trace(std::move(t)) {}
};

/// Estimates the weighted normal derivative from slices at geometric heights
/// (at least 4) by differences in y^{2s} and Richardson extrapolation in y,
/// then calibrates against the spectral fractional Laplacian.
NormalTrace normal_trace(const ExtensionSlices& slices, const PoissonKernelSpec& spec,
                         const NormalTraceOptions& options = {});

}  // namespace fpb
