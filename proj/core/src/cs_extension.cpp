#include "fpb/cs_extension.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "fpb/parallel.hpp"

namespace fpb {

PoissonKernelSpec::PoissonKernelSpec(int n, double s) : n_(n), s_(s) {
  if (n != 1 && n != 2) throw std::invalid_argument("PoissonKernelSpec: dimension must be 1 or 2");
  if (!(s > 0.0 && s < 1.0)) {
    throw std::invalid_argument("PoissonKernelSpec: s must lie in (0, 1), got " + std::to_string(s));
  }
}

double PoissonKernelSpec::omega() const {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n_) / std::tgamma(0.5 * n_);
}

double PoissonKernelSpec::normalization() const { return 1.0 / kernel_lq_norm(1.0, 1.0, *this); }

namespace {

double radius2(std::array<double, 2> x, int n) { return n == 1 ? x[0] * x[0] : x[0] * x[0] + x[1] * x[1]; }

}  // namespace

double poisson_kernel(std::array<double, 2> x, double y, const PoissonKernelSpec& spec) {
  if (!(y > 0.0)) throw std::invalid_argument("poisson_kernel: y must be positive");
  const double s = spec.s();
  return std::pow(y, 2.0 * s) * std::pow(radius2(x, spec.dim()) + y * y, -0.5 * (spec.dim() + 2.0 * s));
}

double poisson_kernel_dy(std::array<double, 2> x, double y, const PoissonKernelSpec& spec) {
  if (!(y > 0.0)) throw std::invalid_argument("poisson_kernel_dy: y must be positive");
  const double s = spec.s();
  const double n = spec.dim();
  const double r2 = radius2(x, spec.dim()) + y * y;
  const double a = 0.5 * (n + 2.0 * s);
  return 2.0 * s * std::pow(y, 2.0 * s - 1.0) * std::pow(r2, -a) -
         (n + 2.0 * s) * std::pow(y, 2.0 * s + 1.0) * std::pow(r2, -a - 1.0);
}

double kernel_lq_norm(double y, double q, const PoissonKernelSpec& spec) {
  if (!(y > 0.0)) throw std::invalid_argument("kernel_lq_norm: y must be positive");
  if (!(q >= 1.0)) throw std::invalid_argument("kernel_lq_norm: q must be >= 1");
  const double n = spec.dim();
  const double a = 0.5 * n;
  const double b = 0.5 * n * (q - 1.0) + spec.s() * q;
  if (!(b > 0.0)) throw std::invalid_argument("kernel_lq_norm: nonpositive Beta argument");
  const double value = 0.5 * spec.omega() * std::pow(y, n * (1.0 - q)) * std::beta(a, b);
  return std::pow(value, 1.0 / q);
}

std::vector<double> geometric_heights(double y0, double r, int count) {
  if (!(y0 > 0.0) || !(r > 0.0 && r < 1.0) || count < 1) {
    throw std::invalid_argument("geometric_heights: need y0 > 0, 0 < r < 1, count >= 1");
  }
  std::vector<double> out(count);
  for (int j = 0; j < count; ++j) out[j] = y0 * std::pow(r, j);
  return out;
}

namespace {

// Smallest arc of the circle of length `period` covering the given sorted
// positions in [0, period).
double covering_arc(std::vector<double> pos, double period) {
  if (pos.empty()) return 0.0;
  std::sort(pos.begin(), pos.end());
  double gap = pos.front() + period - pos.back();
  for (std::size_t k = 1; k < pos.size(); ++k) gap = std::max(gap, pos[k] - pos[k - 1]);
  return period - gap;
}

// Periodized, unnormalized kernel at signed offset d (|d_i| <= L/2).
double periodized_kernel(std::array<double, 2> d, double y, const PoissonKernelSpec& spec, double L,
                         int images) {
  const double s = spec.s();
  const double y2s = std::pow(y, 2.0 * s);
  double sum = 0.0;
  if (spec.dim() == 1) {
    for (int m = -images; m <= images; ++m) sum += poisson_kernel({d[0] + m * L, 0.0}, y, spec);
    const double Z = (images + 0.5) * L;
    sum += y2s / (2.0 * s * L) * (std::pow(Z + d[0], -2.0 * s) + std::pow(Z - d[0], -2.0 * s));
  } else {
    for (int a = -images; a <= images; ++a) {
      for (int b = -images; b <= images; ++b) {
        sum += poisson_kernel({d[0] + a * L, d[1] + b * L}, y, spec);
      }
    }
    const double R = (2.0 * images + 1.0) * L / std::sqrt(std::numbers::pi);
    sum += y2s * 2.0 * std::numbers::pi * std::pow(R, -2.0 * s) / (2.0 * s * L * L);
  }
  return sum;
}

}  // namespace

double support_diameter(const Field& u) {
  const GridSpec& g = u.grid();
  double peak = 0.0;
  for (std::size_t i = 0; i < u.points(); ++i) {
    for (int c = 0; c < u.components(); ++c) peak = std::max(peak, std::abs(u(i, c)));
  }
  if (peak == 0.0) return 0.0;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < u.points(); ++i) {
    double a = 0.0;
    for (int c = 0; c < u.components(); ++c) a = std::max(a, std::abs(u(i, c)));
    if (a > 1e-8 * peak) {
      const auto pt = g.point(i);
      xs.push_back(pt[0]);
      ys.push_back(pt[1]);
    }
  }
  const double h = g.spacing();
  const double dx = covering_arc(xs, g.period()) + h;
  if (g.dim() == 1) return std::min(dx, g.period());
  const double dy = covering_arc(ys, g.period()) + h;
  return std::hypot(std::min(dx, g.period()), std::min(dy, g.period()));
}

ExtensionSlices extend(const Field& u, std::vector<double> heights, const PoissonKernelSpec& spec,
                       const ExtensionOptions& options) {
  const GridSpec& grid = u.grid();
  if (u.components() != 1) throw std::invalid_argument("extend: scalar field required");
  if (grid.dim() != spec.dim()) throw std::invalid_argument("extend: kernel and grid dimension differ");
  if (heights.empty()) throw std::invalid_argument("extend: no heights given");
  std::sort(heights.begin(), heights.end());
  for (std::size_t j = 0; j < heights.size(); ++j) {
    if (!(heights[j] > 0.0)) throw std::invalid_argument("extend: heights must be positive");
    if (j > 0 && heights[j] == heights[j - 1]) throw std::invalid_argument("extend: duplicate height");
  }
  const int images = options.images >= 0 ? options.images : (grid.dim() == 1 ? 2000 : 12);
  const double L = grid.period();
  const int N = grid.points_per_axis();
  const double h = grid.spacing();

  ExtensionSlices out(u);
  out.s = spec.s();
  out.heights = heights;
  const double diam = support_diameter(u);
  if (L < 8.0 * diam) {
    out.support_warning = true;
    out.warning = "period " + std::to_string(L) + " is shorter than 8 x support diameter " +
                  std::to_string(diam);
  }
  out.slices.assign(heights.size(), Field(grid, 1));
  out.tail_mass.assign(heights.size(), 0.0);

  const double C = spec.normalization();
  parallel_for(heights.size(), [&](std::size_t j) {
    const double y = heights[j];
    std::vector<double> kernel(grid.size());
    double total = 0.0;
    double central = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto idx = grid.multi_index(i);
      const std::array<double, 2> d{(idx[0] < N / 2 ? idx[0] : idx[0] - N) * h,
                                    grid.dim() == 1 ? 0.0 : (idx[1] < N / 2 ? idx[1] : idx[1] - N) * h};
      kernel[i] = periodized_kernel(d, y, spec, L, images);
      total += kernel[i];
      central += poisson_kernel(d, y, spec);
    }
    out.tail_mass[j] = std::max(0.0, 1.0 - C * central * grid.cell_volume());
    for (double& v : kernel) v /= total;
    const auto spectrum = half_spectrum_transform(grid, kernel);
    std::vector<double> weights(spectrum.size() / 2);
    for (std::size_t b = 0; b < weights.size(); ++b) weights[b] = spectrum[2 * b];
    const MultiplierOp conv = MultiplierOp::from_half_spectrum(grid, std::move(weights));
    out.slices[j] = conv.apply(u);
  });
  return out;
}

double pde_residual_check(const PoissonKernelSpec& spec, const std::vector<HalfSpacePoint>& points,
                          double h) {
  if (!(h > 0.0)) throw std::invalid_argument("pde_residual_check: step must be positive");
  const double s = spec.s();
  double worst = 0.0;
  for (const auto& pt : points) {
    if (!(pt.y > h)) throw std::invalid_argument("pde_residual_check: sample too close to y = 0");
    const double p0 = poisson_kernel(pt.x, pt.y, spec);
    double lap = 0.0;
    for (int a = 0; a < spec.dim(); ++a) {
      auto xp = pt.x, xm = pt.x;
      xp[a] += h;
      xm[a] -= h;
      lap += poisson_kernel(xp, pt.y, spec) - 2.0 * p0 + poisson_kernel(xm, pt.y, spec);
    }
    const double up = poisson_kernel(pt.x, pt.y + h, spec);
    const double dn = poisson_kernel(pt.x, pt.y - h, spec);
    lap += up - 2.0 * p0 + dn;
    lap /= h * h;
    const double dy = (up - dn) / (2.0 * h);
    const double res = lap + (1.0 - 2.0 * s) / pt.y * dy;
    worst = std::max(worst, std::abs(res) / p0);
  }
  return worst;
}

double kernel_derivative_constant(const PoissonKernelSpec& spec, const std::vector<HalfSpacePoint>& points) {
  const double s = spec.s();
  double best = 0.0;
  for (const auto& pt : points) {
    const double r2 = radius2(pt.x, spec.dim()) + pt.y * pt.y;
    const double bound = std::pow(pt.y, 2.0 * s - 1.0) * std::pow(r2, -0.5 * (spec.dim() + 2.0 * s));
    best = std::max(best, std::abs(poisson_kernel_dy(pt.x, pt.y, spec)) / bound);
  }
  return best;
}

NormalTrace normal_trace(const ExtensionSlices& slices, const PoissonKernelSpec& spec,
                         const NormalTraceOptions& options) {
  if (options.richardson_terms < 0) throw std::invalid_argument("normal_trace: negative term count");
  const std::size_t J = slices.heights.size();
  if (J < 4) throw std::invalid_argument("normal_trace: need at least 4 heights");
  // Heights are stored increasing; walk them from the top down.
  std::vector<double> y(J);
  std::vector<const Field*> U(J);
  for (std::size_t j = 0; j < J; ++j) {
    y[j] = slices.heights[J - 1 - j];
    U[j] = &slices.slices[J - 1 - j];
  }
  const double r = y[1] / y[0];
  for (std::size_t j = 1; j < J; ++j) {
    if (std::abs(y[j] / y[j - 1] - r) > 1e-9 * r) {
      throw std::invalid_argument("normal_trace: heights must form a geometric sequence");
    }
  }
  const double s = spec.s();
  const GridSpec& grid = slices.base.grid();
  const std::size_t P = grid.size();

  // D_j approximates y^{1-2s} dU/dy between levels j and j+1.
  std::vector<std::vector<double>> D(J - 1, std::vector<double>(P));
  for (std::size_t j = 0; j + 1 < J; ++j) {
    const double denom = std::pow(y[j], 2.0 * s) - std::pow(y[j + 1], 2.0 * s);
    for (std::size_t i = 0; i < P; ++i) D[j][i] = 2.0 * s * ((*U[j])(i) - (*U[j + 1])(i)) / denom;
  }
  auto diff_norm = [&](std::size_t j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < P; ++i) acc += (D[j][i] - D[j + 1][i]) * (D[j][i] - D[j + 1][i]);
    return std::sqrt(acc);
  };
  const std::size_t last = J - 2;
  // Diagnostic: leading error exponent seen in the data.
  double gamma = 0.0;
  {
    const double d0 = diff_norm(last - 2);
    const double d1 = diff_norm(last - 1);
    if (d0 > 0.0 && d1 > 0.0) gamma = std::log(d1 / d0) / std::log(r);
  }

  // D_j = D_inf + sum_e c_e y_j^e with e in {2k - 2s, 2k}, k >= 1: the small-t
  // expansion of the kernel symbol t^s K_s(t). Eliminate the first K terms
  // using the K + 1 lowest levels.
  const int K = std::min<int>(options.richardson_terms, static_cast<int>(J) - 2);
  std::vector<double> exps;
  for (int k = 1; static_cast<int>(exps.size()) < K; ++k) {
    exps.push_back(2.0 * k - 2.0 * s);
    exps.push_back(2.0 * k);
  }
  std::sort(exps.begin(), exps.end());
  exps.resize(std::max(K, 0));
  const std::size_t first = last - static_cast<std::size_t>(std::max(K, 0));
  Eigen::MatrixXd V(K + 1, K + 1);
  for (int a = 0; a <= K; ++a) {
    V(a, 0) = 1.0;
    for (int c = 0; c < K; ++c) V(a, c + 1) = std::pow(y[first + a] / y[last], exps[c]);
  }
  const Eigen::VectorXd weights = V.transpose().fullPivLu().solve(Eigen::VectorXd::Unit(K + 1, 0));

  Field trace(grid, 1);
  for (std::size_t i = 0; i < P; ++i) {
    double acc = 0.0;
    for (int a = 0; a <= K; ++a) acc += weights(a) * D[first + a][i];
    trace(i) = -acc;
  }
  NormalTrace out(trace);
  out.exponent = gamma;
  const Field target = fractional_laplacian(slices.base, s, LaplacianOrder::Full);
  const double tt = l2_inner(trace, trace);
  out.calibration = tt > 0.0 ? l2_inner(trace, target) / tt : 0.0;
  const Field err = trace * out.calibration - target;
  const double tn = std::sqrt(l2_inner(target, target));
  out.relative_error = tn > 0.0 ? std::sqrt(l2_inner(err, err)) / tn : 0.0;
  return out;
}

}  // namespace fpb
