#include "fpb/verification/oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace fpb::verification {

namespace {

std::vector<int> index_list(const std::vector<std::size_t>& pts) { return {pts.begin(), pts.end()}; }

Eigen::MatrixXd block(const Eigen::MatrixXd& K, const std::vector<std::size_t>& rows,
                      const std::vector<std::size_t>& cols) {
  return K(index_list(rows), index_list(cols));
}

void require_scalar(const Field& u, const DomainMask& mask, const Eigen::MatrixXd& K) {
  if (u.components() != 1 || !(u.grid() == mask.grid()) || K.rows() != static_cast<long>(u.points())) {
    throw std::invalid_argument("dense oracle: scalar field on the operator grid required");
  }
}

}  // namespace

Eigen::MatrixXd dense_multiplier(const GridSpec& grid, double t) {
  const int N = grid.points_per_axis();
  const std::size_t size = grid.size();
  const double inv = 1.0 / static_cast<double>(size);
  // The kernel depends only on the index offset, so tabulate it once.
  std::vector<double> kernel(size, 0.0);
  for (std::size_t d = 0; d < size; ++d) {
    const auto off = grid.multi_index(d);
    double sum = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      const auto bin = grid.multi_index(k);
      const int k0 = grid.signed_mode(bin[0]);
      const int k1 = grid.dim() == 2 ? grid.signed_mode(bin[1]) : 0;
      const double xi2 = std::pow(grid.wavenumber(k0), 2) + std::pow(grid.wavenumber(k1), 2);
      if (xi2 == 0.0) continue;
      const double phase = 2.0 * std::numbers::pi * (static_cast<double>(k0) * off[0] + static_cast<double>(k1) * off[1]) / N;
      sum += std::pow(xi2, t) * std::cos(phase);
    }
    kernel[d] = sum * inv;
  }
  Eigen::MatrixXd M(size, size);
  for (std::size_t i = 0; i < size; ++i) {
    const auto a = grid.multi_index(i);
    for (std::size_t j = 0; j < size; ++j) {
      const auto b = grid.multi_index(j);
      const int d0 = ((a[0] - b[0]) % N + N) % N;
      const int d1 = grid.dim() == 2 ? ((a[1] - b[1]) % N + N) % N : 0;
      M(i, j) = kernel[grid.flat_index(d0, d1)];
    }
  }
  return M;
}

Eigen::MatrixXd dense_linear_operator(const GridSpec& grid, double s,
                                      const std::optional<ConformalCoefficient>& sigma) {
  const Eigen::MatrixXd H = dense_multiplier(grid, 0.5 * s);
  if (!sigma) return H * H;
  Eigen::VectorXd d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) d(i) = (*sigma)[i];
  return H * d.asDiagonal() * H;
}

Field dense_interior_source(const Field& F, const DomainMask& mask, const Eigen::MatrixXd& K) {
  require_scalar(F, mask, K);
  const auto& in = mask.interior_points();
  Eigen::VectorXd rhs(in.size());
  for (std::size_t a = 0; a < in.size(); ++a) rhs(a) = F(in[a]);
  const Eigen::VectorXd x = block(K, in, in).ldlt().solve(rhs);
  Field u(F.grid(), 1);
  for (std::size_t a = 0; a < in.size(); ++a) u(in[a]) = x(a);
  return u;
}

Field dense_exterior_value(const Field& u0, const DomainMask& mask, const Eigen::MatrixXd& K) {
  require_scalar(u0, mask, K);
  const auto& in = mask.interior_points();
  const auto& ex = mask.exterior_points();
  Eigen::VectorXd g(ex.size());
  for (std::size_t a = 0; a < ex.size(); ++a) g(a) = u0(ex[a]);
  const Eigen::VectorXd x = block(K, in, in).ldlt().solve(-(block(K, in, ex) * g));
  Field u = restrict_to_exterior(u0, mask);
  for (std::size_t a = 0; a < in.size(); ++a) u(in[a]) = x(a);
  return u;
}

Eigen::MatrixXd dense_dn_matrix(const DomainMask& mask, const Eigen::MatrixXd& K) {
  const auto& in = mask.interior_points();
  const auto& ex = mask.exterior_points();
  const Eigen::MatrixXd Kie = block(K, in, ex);
  const Eigen::MatrixXd schur = block(K, ex, ex) - Kie.transpose() * block(K, in, in).ldlt().solve(Kie);
  return mask.grid().cell_volume() * schur;
}

double dense_first_eigenvalue(const DomainMask& mask, const Eigen::MatrixXd& K) {
  const auto& in = mask.interior_points();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block(K, in, in), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

double quadrature_kernel_lq_norm(int n, double s, double q, double y) {
  if ((n != 1 && n != 2) || !(s > 0.0 && s < 1.0) || !(q >= 1.0) || !(y > 0.0)) {
    throw std::invalid_argument("quadrature_kernel_lq_norm: parameter out of range");
  }
  const double e = 0.5 * (n + 2.0 * s) * q;
  // Substituting r = y t leaves y^{n - q n} outside an integral in t.
  auto f = [&](double t) {
    const double base = std::pow(1.0 + t * t, -e);
    return n == 1 ? 2.0 * base : 2.0 * std::numbers::pi * t * base;
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0;
  const double I = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(),
                                        std::sqrt(std::numeric_limits<double>::epsilon()) * 1e-3, &err);
  return std::pow(std::pow(y, n * (1.0 - q)) * I, 1.0 / q);
}

double analytic_trace_calibration(double s) {
  return std::pow(4.0, s) * std::tgamma(1.0 + s) / (2.0 * s * std::tgamma(1.0 - s));
}

}  // namespace fpb::verification
