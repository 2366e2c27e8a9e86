#include "fpb/energy_ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>

namespace fpb {

namespace {

void require_exponents(double s, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent p must satisfy p > 1");
  if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("order s must satisfy s > 0");
}

}  // namespace

AnisotropyField AnisotropyField::identity(const GridSpec& grid, int m) {
  return constant(grid, m, 1.0);
}

AnisotropyField AnisotropyField::constant(const GridSpec& grid, int m, double scale) {
  if (m < 1) throw std::invalid_argument("AnisotropyField: m must be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("AnisotropyField: scale must be positive");
  AnisotropyField out(grid, m);
  const std::size_t mm = static_cast<std::size_t>(m) * m;
  out.matrices_.assign(grid.size() * mm, 0.0);
  out.roots_.assign(grid.size() * mm, 0.0);
  const double root = std::sqrt(scale);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int c = 0; c < m; ++c) {
      out.matrices_[i * mm + c * m + c] = scale;
      out.roots_[i * mm + c * m + c] = root;
    }
  }
  out.lambda_ = root;
  out.Lambda_ = root;
  out.identity_ = scale == 1.0;
  return out;
}

AnisotropyField AnisotropyField::diagonal(const GridSpec& grid, std::span<const double> diag) {
  const int m = static_cast<int>(diag.size());
  std::vector<double> raw(grid.size() * m * m, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int c = 0; c < m; ++c) raw[i * m * m + c * m + c] = diag[c];
  }
  return matrix_sqrt_field(grid, m, raw);
}

AnisotropyField AnisotropyField::from_matrices(const GridSpec& grid, int m,
                                               std::span<const double> raw) {
  return matrix_sqrt_field(grid, m, raw);
}

AnisotropyField AnisotropyField::scaled(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("AnisotropyField::scaled: factor must be positive");
  AnisotropyField out = *this;
  const double root = std::sqrt(t);
  for (double& v : out.matrices_) v *= t;
  for (double& v : out.roots_) v *= root;
  out.lambda_ *= root;
  out.Lambda_ *= root;
  out.identity_ = identity_ && t == 1.0;
  return out;
}

AnisotropyField matrix_sqrt_field(const GridSpec& grid, int m, std::span<const double> raw) {
  if (m < 1) throw std::invalid_argument("matrix_sqrt_field: m must be >= 1");
  const std::size_t mm = static_cast<std::size_t>(m) * m;
  if (raw.size() != grid.size() * mm) {
    throw std::invalid_argument("matrix_sqrt_field: expected " + std::to_string(grid.size() * mm) +
                                " entries, got " + std::to_string(raw.size()));
  }
  AnisotropyField out = AnisotropyField::constant(grid, m, 1.0);
  out.matrices_.assign(raw.begin(), raw.end());
  double min_eig = std::numeric_limits<double>::infinity();
  double max_eig = 0.0;
  bool identity = true;

  Eigen::MatrixXd a(m, m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double* src = raw.data() + i * mm;
    double scale = 1.0;
    for (std::size_t k = 0; k < mm; ++k) scale = std::max(scale, std::abs(src[k]));
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        const double v = src[r * m + c];
        if (!std::isfinite(v)) {
          throw std::invalid_argument("matrix_sqrt_field: non-finite entry at grid point " +
                                      std::to_string(i));
        }
        if (std::abs(v - src[c * m + r]) > 1e-12 * scale) {
          throw std::invalid_argument("matrix_sqrt_field: matrix not symmetric at grid point " +
                                      std::to_string(i));
        }
        a(r, c) = v;
        if (v != (r == c ? 1.0 : 0.0)) identity = false;
      }
    }
    solver.compute(a);
    const auto& eig = solver.eigenvalues();
    if (!(eig.minCoeff() > 0.0)) {
      throw std::invalid_argument("matrix_sqrt_field: matrix not positive definite at grid point " +
                                  std::to_string(i));
    }
    min_eig = std::min(min_eig, eig.minCoeff());
    max_eig = std::max(max_eig, eig.maxCoeff());
    const Eigen::MatrixXd root = solver.eigenvectors() * eig.cwiseSqrt().asDiagonal() *
                                 solver.eigenvectors().transpose();
    double* dst = out.roots_.data() + i * mm;
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) dst[r * m + c] = 0.5 * (root(r, c) + root(c, r));
    }
  }
  out.lambda_ = std::sqrt(min_eig);
  out.Lambda_ = std::sqrt(max_eig);
  out.identity_ = identity;
  return out;
}

// ---------------------------------------------------------------------------

ConformalCoefficient::ConformalCoefficient(GridSpec grid, std::vector<double> values, double floor)
    : grid_(grid), values_(std::move(values)), floor_(floor) {
  if (!(floor > 0.0)) throw std::invalid_argument("ConformalCoefficient: floor must be positive");
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("ConformalCoefficient: expected one value per grid point");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= floor_) || !std::isfinite(values_[i])) {
      throw std::invalid_argument("ConformalCoefficient: value below floor at grid point " +
                                  std::to_string(i));
    }
  }
}

ConformalCoefficient ConformalCoefficient::constant(const GridSpec& grid, double value, double floor) {
  return ConformalCoefficient(grid, std::vector<double>(grid.size(), value), floor);
}

// ---------------------------------------------------------------------------

EnergyOperator::EnergyOperator(AnisotropyField A, double s, double p,
                               std::optional<ConformalCoefficient> sigma)
    : A_(std::make_shared<const AnisotropyField>(std::move(A))),
      s_(s),
      p_(p),
      sigma_(std::move(sigma)) {
  require_exponents(s, p);
  if (sigma_ && !(sigma_->grid() == A_->grid())) {
    throw std::invalid_argument("EnergyOperator: conformal coefficient grid mismatch");
  }
  half_op_ = std::make_shared<const MultiplierOp>(
      MultiplierOp::fractional_laplacian(A_->grid(), s, LaplacianOrder::Half));
}

EnergyOperator EnergyOperator::with_conformal(std::optional<ConformalCoefficient> sigma) const {
  EnergyOperator out = *this;
  if (sigma && !(sigma->grid() == grid())) {
    throw std::invalid_argument("EnergyOperator: conformal coefficient grid mismatch");
  }
  out.sigma_ = std::move(sigma);
  return out;
}

Field EnergyOperator::half_laplacian(const Field& u) const {
  if (!(u.grid() == grid()) || u.components() != components()) {
    throw std::invalid_argument("EnergyOperator: field grid or component count mismatch");
  }
  return half_op_->apply(u);
}

double EnergyOperator::flux(const Field& w, double eps, Field* out) const {
  const int m = components();
  const bool identity = A_->is_identity();
  const double eps2 = eps * eps;
  double total = 0.0;
  double a[8];
  double aw[8];
  std::vector<double> abuf, awbuf;
  double* av = a;
  double* awv = aw;
  if (m > 8) {
    abuf.resize(m);
    awbuf.resize(m);
    av = abuf.data();
    awv = awbuf.data();
  }
  for (std::size_t i = 0; i < w.points(); ++i) {
    const double sig = sigma_ ? (*sigma_)[i] : 1.0;
    double norm2 = 0.0;
    if (identity) {
      for (int c = 0; c < m; ++c) {
        av[c] = w(i, c);
        norm2 += av[c] * av[c];
      }
    } else {
      const auto root = A_->sqrt_matrix(i);
      for (int r = 0; r < m; ++r) {
        double acc = 0.0;
        for (int c = 0; c < m; ++c) acc += root[r * m + c] * w(i, c);
        av[r] = acc;
        norm2 += acc * acc;
      }
    }
    const double r2 = norm2 + eps2;
    double dens;
    double factor;
    if (p_ == 2.0) {
      dens = r2;
      factor = sig;
    } else if (r2 == 0.0) {
      dens = 0.0;
      factor = 0.0;
    } else {
      const double mag_pm2 = std::pow(r2, 0.5 * (p_ - 2.0));
      dens = mag_pm2 * r2;
      factor = sig * mag_pm2;
    }
    total += sig * dens;
    if (out != nullptr) {
      if (identity) {
        for (int c = 0; c < m; ++c) (*out)(i, c) = factor * av[c];
      } else {
        const auto root = A_->sqrt_matrix(i);
        for (int r = 0; r < m; ++r) {
          double acc = 0.0;
          for (int c = 0; c < m; ++c) acc += root[r * m + c] * av[c];
          awv[r] = acc;
        }
        for (int c = 0; c < m; ++c) (*out)(i, c) = factor * awv[c];
      }
    }
  }
  return total;
}

double EnergyOperator::energy(const Field& u, double eps) const {
  const Field w = half_laplacian(u);
  return flux(w, eps, nullptr) * grid().cell_volume() / p_;
}

std::vector<double> EnergyOperator::density(const Field& w) const {
  const int m = components();
  std::vector<double> out(w.points());
  for (std::size_t i = 0; i < w.points(); ++i) {
    double norm2 = 0.0;
    const auto root = A_->sqrt_matrix(i);
    for (int r = 0; r < m; ++r) {
      double acc = 0.0;
      for (int c = 0; c < m; ++c) acc += root[r * m + c] * w(i, c);
      norm2 += acc * acc;
    }
    const double sig = sigma_ ? (*sigma_)[i] : 1.0;
    out[i] = sig * (p_ == 2.0 ? norm2 : std::pow(norm2, 0.5 * p_));
  }
  return out;
}

double EnergyOperator::pairing(const Field& u, const Field& v) const {
  const Field wu = half_laplacian(u);
  const Field wv = half_laplacian(v);
  Field fl(grid(), components());
  flux(wu, 0.0, &fl);
  return l2_inner(fl, wv);
}

Field EnergyOperator::apply(const Field& u, double eps) const {
  Field g(grid(), components());
  energy_and_gradient(u, eps, g);
  return g;
}

double EnergyOperator::energy_and_gradient(const Field& u, double eps, Field& gradient) const {
  const Field w = half_laplacian(u);
  if (!gradient.same_layout(w)) gradient = Field(grid(), components());
  const double sum = flux(w, eps, &gradient);
  gradient = half_op_->apply(gradient);
  return sum * grid().cell_volume() / p_;
}

// ---------------------------------------------------------------------------

double p_energy(const Field& u, const AnisotropyField& A, double s, double p) {
  return EnergyOperator(A, s, p).energy(u);
}

double weak_pairing(const Field& u, const Field& v, const AnisotropyField& A, double s, double p) {
  if (!u.same_layout(v)) throw std::invalid_argument("weak_pairing: layout mismatch");
  return EnergyOperator(A, s, p).pairing(u, v);
}

Field apply_operator(const Field& u, const AnisotropyField& A, double s, double p) {
  return EnergyOperator(A, s, p).apply(u);
}

MonotonicityGap vector_monotonicity_gap(std::span<const double> x, std::span<const double> y,
                                        double p) {
  if (x.size() != y.size()) throw std::invalid_argument("vector_monotonicity_gap: size mismatch");
  if (!(p > 1.0)) throw std::invalid_argument("vector_monotonicity_gap: p must exceed 1");
  double nx = 0.0, ny = 0.0, nd = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    nx += x[k] * x[k];
    ny += y[k] * y[k];
    nd += (x[k] - y[k]) * (x[k] - y[k]);
  }
  nx = std::sqrt(nx);
  ny = std::sqrt(ny);
  nd = std::sqrt(nd);
  const double fx = nx > 0.0 ? std::pow(nx, p - 2.0) : 0.0;
  const double fy = ny > 0.0 ? std::pow(ny, p - 2.0) : 0.0;
  double lhs = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) lhs += (fx * x[k] - fy * y[k]) * (x[k] - y[k]);
  double rhs;
  if (p >= 2.0) {
    rhs = std::pow(nd, p);
  } else {
    const double denom = nx + ny;
    rhs = denom > 0.0 ? nd * nd / std::pow(denom, 2.0 - p) : 0.0;
  }
  return {lhs, rhs};
}

double fit_monotonicity_constant(double p, int m, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(m), y(m);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples; ++k) {
    const int kind = static_cast<int>(k % 3);
    const double spread = std::pow(10.0, -4.0 * unit(rng));
    for (int c = 0; c < m; ++c) x[c] = normal(rng);
    for (int c = 0; c < m; ++c) {
      const double noise = spread * normal(rng);
      if (kind == 0) {
        y[c] = normal(rng);
      } else if (kind == 1) {
        y[c] = -x[c] + noise;
      } else {
        y[c] = x[c] + noise;
      }
    }
    const auto gap = vector_monotonicity_gap(x, y, p);
    if (gap.rhs > 0.0) best = std::min(best, gap.lhs / gap.rhs);
  }
  return best;
}

double monotonicity_constant(double p) {
  static std::mutex mutex;
  static std::map<double, double> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(p);
  if (it != cache.end()) return it->second;
  const double c = 0.9 * fit_monotonicity_constant(p, 2, 100000, 20240611ULL);
  cache.emplace(p, c);
  return c;
}

}  // namespace fpb
