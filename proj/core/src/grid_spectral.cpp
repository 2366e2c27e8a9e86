#include "fpb/grid_spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fpb {

GridSpec::GridSpec(int dim, int points_per_axis, double period)
    : dim_(dim), points_per_axis_(points_per_axis), period_(period), size_(0) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("GridSpec: dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (points_per_axis < 4 || points_per_axis % 2 != 0) {
    throw std::invalid_argument("GridSpec: points per axis must be even and >= 4, got " +
                                std::to_string(points_per_axis));
  }
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw std::invalid_argument("GridSpec: period must be positive and finite");
  }
  size_ = dim == 1 ? static_cast<std::size_t>(points_per_axis)
                   : static_cast<std::size_t>(points_per_axis) * points_per_axis;
}

double GridSpec::cell_volume() const { return std::pow(spacing(), dim_); }

std::array<int, 2> GridSpec::multi_index(std::size_t flat) const {
  if (dim_ == 1) return {static_cast<int>(flat), 0};
  return {static_cast<int>(flat / points_per_axis_), static_cast<int>(flat % points_per_axis_)};
}

std::array<double, 2> GridSpec::point(std::size_t flat) const {
  const auto idx = multi_index(flat);
  const double h = spacing();
  return {idx[0] * h, dim_ == 1 ? 0.0 : idx[1] * h};
}

std::size_t GridSpec::flat_index(int i, int j) const {
  const int n = points_per_axis_;
  i = ((i % n) + n) % n;
  if (dim_ == 1) return static_cast<std::size_t>(i);
  j = ((j % n) + n) % n;
  return static_cast<std::size_t>(i) * n + j;
}

double GridSpec::wavenumber(int k) const { return 2.0 * std::numbers::pi * k / period_; }

int GridSpec::signed_mode(int bin) const {
  return bin < points_per_axis_ / 2 ? bin : bin - points_per_axis_;
}

// ---------------------------------------------------------------------------

Field::Field(GridSpec grid, int components)
    : grid_(grid), components_(components), values_() {
  if (components < 1) throw std::invalid_argument("Field: component count must be >= 1");
  values_.assign(grid_.size() * components_, 0.0);
}

Field::Field(GridSpec grid, int components, std::vector<double> values)
    : grid_(grid), components_(components), values_(std::move(values)) {
  if (components < 1) throw std::invalid_argument("Field: component count must be >= 1");
  if (values_.size() != grid_.size() * components_) {
    throw std::invalid_argument("Field: expected " + std::to_string(grid_.size() * components_) +
                                " values, got " + std::to_string(values_.size()));
  }
}

Field Field::from_function(const GridSpec& grid,
                           const std::function<double(std::array<double, 2>)>& f) {
  Field out(grid, 1);
  for (std::size_t i = 0; i < grid.size(); ++i) out(i) = f(grid.point(i));
  return out;
}

std::vector<double> Field::component(int c) const {
  std::vector<double> out(points());
  for (std::size_t i = 0; i < points(); ++i) out[i] = (*this)(i, c);
  return out;
}

void Field::set_component(int c, std::span<const double> data) {
  if (data.size() != points()) throw std::invalid_argument("Field::set_component: size mismatch");
  for (std::size_t i = 0; i < points(); ++i) (*this)(i, c) = data[i];
}

bool Field::is_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field& Field::operator+=(const Field& other) {
  if (!same_layout(other)) throw std::invalid_argument("Field: layout mismatch in +=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  if (!same_layout(other)) throw std::invalid_argument("Field: layout mismatch in -=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double t) {
  for (double& v : values_) v *= t;
  return *this;
}

// ---------------------------------------------------------------------------

class FftPlan {
 public:
  FftPlan(int dim, int n) : dim_(dim), n_(n) {
    real_size_ = dim == 1 ? n : static_cast<std::size_t>(n) * n;
    half_size_ = dim == 1 ? n / 2 + 1 : static_cast<std::size_t>(n) * (n / 2 + 1);
    double* r = fftw_alloc_real(real_size_);
    fftw_complex* c = fftw_alloc_complex(half_size_);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (dim == 1) {
      forward_ = fftw_plan_dft_r2c_1d(n, r, c, flags);
      backward_ = fftw_plan_dft_c2r_1d(n, c, r, flags);
    } else {
      forward_ = fftw_plan_dft_r2c_2d(n, n, r, c, flags);
      backward_ = fftw_plan_dft_c2r_2d(n, n, c, r, flags);
    }
    fftw_free(r);
    fftw_free(c);
    if (forward_ == nullptr || backward_ == nullptr) {
      throw std::runtime_error("FFTW planning failed");
    }
  }
  ~FftPlan() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t real_size() const { return real_size_; }
  std::size_t half_size() const { return half_size_; }

  void forward(const double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }
  // Destroys the contents of `in`.
  void backward(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(in), out);
  }

  static std::shared_ptr<const FftPlan> get(int dim, int n) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const FftPlan>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{dim, n}];
    if (!slot) slot = std::make_shared<const FftPlan>(dim, n);
    return slot;
  }

 private:
  int dim_;
  int n_;
  std::size_t real_size_;
  std::size_t half_size_;
  fftw_plan forward_;
  fftw_plan backward_;
};

namespace {

// Frequency magnitude |xi| of every half-spectrum bin.
std::vector<double> half_spectrum_magnitudes(const GridSpec& grid) {
  const int n = grid.points_per_axis();
  const int half = n / 2 + 1;
  std::vector<double> out;
  if (grid.dim() == 1) {
    out.resize(half);
    for (int k = 0; k < half; ++k) out[k] = std::abs(grid.wavenumber(k));
  } else {
    out.resize(static_cast<std::size_t>(n) * half);
    for (int a = 0; a < n; ++a) {
      const double xa = grid.wavenumber(grid.signed_mode(a));
      for (int b = 0; b < half; ++b) {
        const double xb = grid.wavenumber(b);
        out[static_cast<std::size_t>(a) * half + b] = std::hypot(xa, xb);
      }
    }
  }
  return out;
}

// Multiplicity of a half-spectrum bin in the full spectrum.
double bin_multiplicity(const GridSpec& grid, std::size_t bin) {
  const int n = grid.points_per_axis();
  const int half = n / 2 + 1;
  const int last = static_cast<int>(bin % half);
  return (last == 0 || last == n / 2) ? 1.0 : 2.0;
}

}  // namespace

MultiplierOp::MultiplierOp(GridSpec grid, std::vector<double> weights)
    : grid_(grid),
      weights_(std::move(weights)),
      plan_(FftPlan::get(grid.dim(), grid.points_per_axis())) {
  if (weights_.size() != plan_->half_size()) {
    throw std::invalid_argument("MultiplierOp: half-spectrum weight count mismatch");
  }
}

MultiplierOp::MultiplierOp(const GridSpec& grid, const std::function<double(double)>& symbol)
    : MultiplierOp(grid, [&] {
        auto w = half_spectrum_magnitudes(grid);
        const double scale = 1.0 / static_cast<double>(grid.size());
        for (double& v : w) v = symbol(v) * scale;
        return w;
      }()) {}

MultiplierOp MultiplierOp::fractional_laplacian(const GridSpec& grid, double s,
                                                LaplacianOrder order) {
  if (!(s >= 0.0)) throw std::invalid_argument("fractional_laplacian: order s must be >= 0");
  const double exponent = order == LaplacianOrder::Half ? s : 2.0 * s;
  return MultiplierOp(grid, [exponent](double xi) {
    if (exponent == 0.0) return 1.0;
    return xi == 0.0 ? 0.0 : std::pow(xi, exponent);
  });
}

MultiplierOp MultiplierOp::bessel(const GridSpec& grid, double s) {
  return MultiplierOp(grid, [s](double xi) { return std::pow(1.0 + xi * xi, 0.5 * s); });
}

MultiplierOp MultiplierOp::from_half_spectrum(const GridSpec& grid, std::vector<double> weights) {
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (double& v : weights) v *= scale;
  return MultiplierOp(grid, std::move(weights));
}

void MultiplierOp::apply_scalar(std::span<const double> in, std::span<double> out) const {
  if (in.size() != grid_.size() || out.size() != grid_.size()) {
    throw std::invalid_argument("MultiplierOp: input does not live on the operator grid");
  }
  std::vector<std::complex<double>> spectrum(plan_->half_size());
  plan_->forward(in.data(), spectrum.data());
  for (std::size_t b = 0; b < spectrum.size(); ++b) spectrum[b] *= weights_[b];
  plan_->backward(spectrum.data(), out.data());
}

Field MultiplierOp::apply(const Field& u) const {
  if (!(u.grid() == grid_)) throw std::invalid_argument("MultiplierOp: grid mismatch");
  Field out(u.grid(), u.components());
  if (u.components() == 1) {
    apply_scalar(u.values(), out.values());
    return out;
  }
  std::vector<double> buffer(u.points());
  for (int c = 0; c < u.components(); ++c) {
    for (std::size_t i = 0; i < u.points(); ++i) buffer[i] = u(i, c);
    apply_scalar(buffer, buffer);
    for (std::size_t i = 0; i < u.points(); ++i) out(i, c) = buffer[i];
  }
  return out;
}

std::vector<double> half_spectrum_transform(const GridSpec& grid, std::span<const double> data) {
  if (data.size() != grid.size()) throw std::invalid_argument("half_spectrum_transform: size");
  auto plan = FftPlan::get(grid.dim(), grid.points_per_axis());
  std::vector<std::complex<double>> spectrum(plan->half_size());
  plan->forward(data.data(), spectrum.data());
  std::vector<double> out(2 * spectrum.size());
  for (std::size_t b = 0; b < spectrum.size(); ++b) {
    out[2 * b] = spectrum[b].real();
    out[2 * b + 1] = spectrum[b].imag();
  }
  return out;
}

Field fractional_laplacian(const Field& u, double s, LaplacianOrder order) {
  return MultiplierOp::fractional_laplacian(u.grid(), s, order).apply(u);
}

Field bessel_potential(const Field& u, double s) { return MultiplierOp::bessel(u.grid(), s).apply(u); }

double lp_norm(const Field& u, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: exponent must be >= 1");
  const int m = u.components();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.points(); ++i) {
    double sq = 0.0;
    for (int c = 0; c < m; ++c) sq += u(i, c) * u(i, c);
    sum += p == 2.0 ? sq : std::pow(sq, 0.5 * p);
  }
  return std::pow(sum * u.grid().cell_volume(), 1.0 / p);
}

double hsp_norm(const Field& u, double s, double p) { return lp_norm(bessel_potential(u, s), p); }

double l2_inner(const Field& u, const Field& v) {
  if (!u.same_layout(v)) throw std::invalid_argument("l2_inner: layout mismatch");
  double sum = 0.0;
  const auto a = u.values();
  const auto b = v.values();
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum * u.grid().cell_volume();
}

double spectral_l2_norm_squared(const Field& u) {
  const GridSpec& grid = u.grid();
  double total = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    const auto comp = u.component(c);
    const auto spec = half_spectrum_transform(grid, comp);
    const std::size_t bins = spec.size() / 2;
    for (std::size_t b = 0; b < bins; ++b) {
      const double re = spec[2 * b];
      const double im = spec[2 * b + 1];
      total += bin_multiplicity(grid, b) * (re * re + im * im);
    }
  }
  return total * grid.cell_volume() / static_cast<double>(grid.size());
}

}  // namespace fpb
