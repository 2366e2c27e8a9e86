#pragma once

/// @file grid_spectral.hpp
/// @brief Periodic grids, sampled fields and Fourier-multiplier operators.
///
/// All operators act on the torus [0, L)^n sampled at N points per axis.
/// Grid point i along an axis sits at x_i = i * L / N. The discrete Fourier
/// pairing is the standard unnormalized forward / (1/N^n) backward pair; only
/// multiplier actions are exposed, so the convention never leaks into results.

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace fpb {

/// Uniform periodic grid in one or two dimensions.
class GridSpec {
 public:
  GridSpec(int dim, int points_per_axis, double period);

  int dim() const { return dim_; }
  int points_per_axis() const { return points_per_axis_; }
  double period() const { return period_; }

  std::size_t size() const { return size_; }
  double spacing() const { return period_ / points_per_axis_; }
  double cell_volume() const;

  /// Physical coordinates of a flat point index (unused axes are 0).
  std::array<double, 2> point(std::size_t flat) const;
  std::array<int, 2> multi_index(std::size_t flat) const;
  std::size_t flat_index(int i, int j = 0) const;

  /// Angular wavenumber 2*pi*k/L of the integer mode k.
  double wavenumber(int k) const;
  /// Signed mode number of DFT bin b, in [-N/2, N/2).
  int signed_mode(int bin) const;

  bool operator==(const GridSpec& other) const = default;

 private:
  int dim_;
  int points_per_axis_;
  double period_;
  std::size_t size_;
};

/// An m-component real field sampled on a grid, stored point-major and
/// component-minor: values[point * m + c].
class Field {
 public:
  explicit Field(GridSpec grid, int components = 1);
  Field(GridSpec grid, int components, std::vector<double> values);

  static Field from_function(const GridSpec& grid,
                             const std::function<double(std::array<double, 2>)>& f);

  const GridSpec& grid() const { return grid_; }
  int components() const { return components_; }
  std::size_t points() const { return grid_.size(); }

  double& operator()(std::size_t point, int component = 0) {
    return values_[point * components_ + component];
  }
  double operator()(std::size_t point, int component = 0) const {
    return values_[point * components_ + component];
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::vector<double> component(int c) const;
  void set_component(int c, std::span<const double> data);

  bool is_finite() const;
  bool same_layout(const Field& other) const {
    return grid_ == other.grid_ && components_ == other.components_;
  }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double t);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, double t) { return a *= t; }
  friend Field operator*(double t, Field a) { return a *= t; }

 private:
  GridSpec grid_;
  int components_;
  std::vector<double> values_;
};

class FftPlan;

enum class LaplacianOrder {
  Half,  ///< (-Delta)^{s/2}, symbol |xi|^s
  Full,  ///< (-Delta)^s, symbol |xi|^{2s}
};

/// Radial real Fourier multiplier on a fixed grid. Symbol weights are
/// precomputed per half-spectrum bin; application is componentwise.
class MultiplierOp {
 public:
  /// symbol(|xi|) evaluated at every lattice frequency magnitude.
  MultiplierOp(const GridSpec& grid, const std::function<double(double)>& symbol);

  static MultiplierOp fractional_laplacian(const GridSpec& grid, double s,
                                           LaplacianOrder order = LaplacianOrder::Half);
  static MultiplierOp bessel(const GridSpec& grid, double s);
  /// Multiplier given directly by its half-spectrum weights (r2c layout).
  static MultiplierOp from_half_spectrum(const GridSpec& grid, std::vector<double> weights);

  const GridSpec& grid() const { return grid_; }

  Field apply(const Field& u) const;
  /// Applies to one scalar component; in and out may alias.
  void apply_scalar(std::span<const double> in, std::span<double> out) const;

  /// Number of half-spectrum bins and the signed 2-d mode of a bin.
  std::size_t half_spectrum_size() const { return weights_.size(); }
  std::span<const double> half_spectrum() const { return weights_; }

 private:
  MultiplierOp(GridSpec grid, std::vector<double> weights);

  GridSpec grid_;
  std::vector<double> weights_;  // includes the 1/N^n backward scaling
  std::shared_ptr<const FftPlan> plan_;
};

/// Forward real DFT of one component into the r2c half spectrum, returned as
/// interleaved (re, im) pairs.
std::vector<double> half_spectrum_transform(const GridSpec& grid, std::span<const double> data);

/// Applies (-Delta)^{s/2} (order Half) or (-Delta)^s (order Full) componentwise.
Field fractional_laplacian(const Field& u, double s, LaplacianOrder order = LaplacianOrder::Half);
/// Applies <D>^s = (1 + |xi|^2)^{s/2} componentwise; any real s.
Field bessel_potential(const Field& u, double s);

/// (sum_x |u(x)|^p cellvol)^{1/p} with |.| the euclidean norm over components.
double lp_norm(const Field& u, double p);
/// lp_norm(bessel_potential(u, s), p).
double hsp_norm(const Field& u, double s, double p);
/// Grid quadrature of the pointwise euclidean product <u(x), v(x)>.
double l2_inner(const Field& u, const Field& v);
/// The squared L2 norm evaluated in frequency space (Plancherel).
double spectral_l2_norm_squared(const Field& u);

}  // namespace fpb
