#include "fpb/verification/criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fpb/cs_extension.hpp"
#include "fpb/dnmap.hpp"
#include "fpb/inverse.hpp"
#include "fpb/poincare.hpp"
#include "fpb/solver.hpp"
#include "fpb/verification/oracles.hpp"

namespace fpb::verification {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double max_abs(const Field& u) {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Field& a, const Field& b) { return max_abs(a - b); }

/// Random smooth scalar field: a few low Fourier modes with normal coefficients.
Field smooth_random(const GridSpec& grid, std::mt19937_64& rng, int modes = 3) {
  std::normal_distribution<double> nd;
  Field f(grid, 1);
  for (int a = 0; a <= modes; ++a) {
    for (int b = 0; b <= (grid.dim() == 2 ? modes : 0); ++b) {
      const double c = nd(rng) / (1.0 + a + b);
      const double phase = kTwoPi * std::uniform_real_distribution<double>()(rng);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto x = grid.point(k);
        f(k) += c * std::cos(grid.wavenumber(a) * x[0] + grid.wavenumber(b) * x[1] + phase);
      }
    }
  }
  return f;
}

/// 1-d grid of 64 points with the interior [16, 48).
struct LineSetup {
  GridSpec grid{1, 64, kTwoPi};
  DomainMask mask = DomainMask::boxes(grid, {{16, 48, 0, 1}});
};

/// 32 x 32 grid with the interior [8, 24)^2.
struct SquareSetup {
  GridSpec grid{2, 32, kTwoPi};
  DomainMask mask = DomainMask::boxes(grid, {{8, 24, 8, 24}});
};

struct Check {
  bool ok = true;
  std::ostringstream text;

  void add(const std::string& name, double value, double tol, bool pass) {
    if (text.tellp() > 0) text << "; ";
    text << name << " = " << sci(value) << " (tol " << sci(tol) << ")";
    ok = ok && pass;
  }
  void le(const std::string& name, double value, double tol) { add(name, value, tol, value <= tol); }
  void note(const std::string& s) {
    if (text.tellp() > 0) text << "; ";
    text << s;
  }
};

// Kernel norm identity against quadrature, plus the two closed-form anchors.
Check criterion_kernel_norms() {
  Check c;
  double worst = 0.0;
  for (int n : {1, 2}) {
    for (double s : {0.25, 0.5, 0.75}) {
      const PoissonKernelSpec spec(n, s);
      for (double q : {1.0, 1.5, 2.0, 3.0}) {
        for (double y : {0.5, 1.0, 2.0}) {
          const double exact = kernel_lq_norm(y, q, spec);
          const double quad = quadrature_kernel_lq_norm(n, s, q, y);
          worst = std::max(worst, std::abs(exact - quad) / quad);
        }
      }
    }
  }
  c.le("max rel dev vs quadrature", worst, 1e-6);
  const PoissonKernelSpec half(1, 0.5);
  c.le("|L1 anchor - pi|", std::abs(kernel_lq_norm(1.0, 1.0, half) - std::numbers::pi), 1e-8);
  c.le("|L2 anchor - sqrt(pi/2)|", std::abs(kernel_lq_norm(1.0, 2.0, half) - std::sqrt(std::numbers::pi / 2.0)),
       1e-8);
  return c;
}

std::vector<Field> trace_inputs(const GridSpec& grid) {
  return {Field::from_function(grid, [](auto x) { return std::cos(x[0]); }),
          Field::from_function(grid, [](auto x) { return std::cos(3.0 * x[0]); }),
          Field::from_function(grid, [](auto x) {
            const double d = x[0] - std::numbers::pi;
            return std::exp(-d * d / (2.0 * 0.2 * 0.2));
          })};
}

Check criterion_normal_trace() {
  Check c;
  const GridSpec grid(1, 512, kTwoPi);
  double worst_err = 0.0;
  double worst_spread = 0.0;
  for (double s : {0.3, 0.5, 0.7}) {
    const PoissonKernelSpec spec(1, s);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const Field& u : trace_inputs(grid)) {
      const ExtensionSlices slices = extend(u, geometric_heights(0.5, 0.5, 6), spec);
      const NormalTrace t = normal_trace(slices, spec);
      worst_err = std::max(worst_err, t.relative_error);
      lo = std::min(lo, t.calibration);
      hi = std::max(hi, t.calibration);
    }
    worst_spread = std::max(worst_spread, hi / lo - 1.0);
  }
  c.le("max rel L2 error", worst_err, 2e-2);
  c.le("calibration spread", worst_spread, 1e-2);
  return c;
}

Check criterion_contraction() {
  Check c;
  const GridSpec grid(1, 512, kTwoPi);
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<Field> inputs = trace_inputs(grid);
  std::mt19937_64 rng(3);
  inputs.push_back(smooth_random(grid, rng, 6));
  for (double s : {0.3, 0.5, 0.7}) {
    const PoissonKernelSpec spec(1, s);
    for (const Field& u : inputs) {
      const ExtensionSlices slices = extend(u, geometric_heights(0.5, 0.5, 6), spec);
      for (double p : {2.0, 3.0}) {
        const double base = lp_norm(u, p);
        for (const Field& slice : slices.slices) worst = std::max(worst, lp_norm(slice, p) / base - 1.0);
      }
    }
  }
  c.le("max(|U(.,y)|_p / |u|_p) - 1", worst, 1e-3);
  return c;
}

Check criterion_linear_oracle() {
  Check c;
  const SquareSetup setup;
  const double s = 0.5;
  const Eigen::MatrixXd K = dense_linear_operator(setup.grid, s);
  const EnergyOperator op(AnisotropyField::identity(setup.grid, 1), s, 2.0);
  SolverOptions opt;
  opt.tol = 1e-12;
  std::mt19937_64 rng(4);

  const Field F = smooth_random(setup.grid, rng);
  const SolveReport a = solve_interior_source(F, setup.mask, op, opt);
  const Field ua = dense_interior_source(F, setup.mask, K);
  c.le("interior-source rel error", max_abs_diff(a.solution, ua) / max_abs(ua), 1e-8);

  const Field u0 = smooth_random(setup.grid, rng);
  const SolveReport b = solve_exterior_value(u0, setup.mask, op, opt);
  const Field ub = dense_exterior_value(u0, setup.mask, K);
  c.le("exterior-value rel error", max_abs_diff(b.solution, ub) / max_abs(ub), 1e-8);
  if (!a.converged || !b.converged) c.add("solver converged", 0.0, 1.0, false);
  return c;
}

/// Per-point 2 x 2 SPD matrices R(theta) diag(a, b) R(theta)^T with a, b drawn
/// from [0.5, 2] times a random overall level.
AnisotropyField random_anisotropy(const GridSpec& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> level(0.25, 4.0);
  std::uniform_real_distribution<double> eig(0.5, 2.0);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  const double base = level(rng);
  std::vector<double> raw(grid.size() * 4);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double a = base * eig(rng);
    const double b = base * eig(rng);
    const double t = angle(rng);
    const double c = std::cos(t);
    const double s = std::sin(t);
    raw[4 * i + 0] = a * c * c + b * s * s;
    raw[4 * i + 1] = (a - b) * c * s;
    raw[4 * i + 2] = (a - b) * c * s;
    raw[4 * i + 3] = a * s * s + b * c * c;
  }
  return AnisotropyField::from_matrices(grid, 2, raw);
}

Field two_component(const GridSpec& grid, std::mt19937_64& rng) {
  Field u(grid, 2);
  for (int c = 0; c < 2; ++c) {
    const Field part = smooth_random(grid, rng);
    u.set_component(c, part.values());
  }
  return u;
}

Check criterion_stability() {
  Check c;
  const LineSetup setup;
  const std::vector<double> ps = {1.5, 2.0, 3.0};
  std::mt19937_64 rng(5);
  int violations = 0;
  double worst_ratio = 0.0;
  for (int draw = 0; draw < 50; ++draw) {
    const double p = ps[draw % 3];
    const AnisotropyField A = random_anisotropy(setup.grid, rng);
    const Field u0 = two_component(setup.grid, rng);
    const EnergyOperator op(A, 0.5, p);
    SolverOptions opt;
    opt.tol = 1e-9;
    const SolveReport r = solve_exterior_value(u0, setup.mask, op, opt);
    const double lhs = lp_norm(op.half_laplacian(r.solution), p);
    const double rhs = std::pow(A.upper() / A.lower(), p) * lp_norm(op.half_laplacian(u0), p);
    worst_ratio = std::max(worst_ratio, lhs / rhs);
    if (!r.converged || lhs > rhs) ++violations;
  }
  c.add("stability violations / 50", violations, 0.0, violations == 0);
  c.note("max lhs/rhs = " + sci(worst_ratio));

  double worst_h = 0.0;
  const Field F = smooth_random(setup.grid, rng);
  for (double p : ps) {
    const EnergyOperator op(AnisotropyField::identity(setup.grid, 1), 0.5, p);
    SolverOptions opt;
    opt.tol = 1e-12;
    const Field u1 = solve_interior_source(F, setup.mask, op, opt).solution;
    for (double t : {0.5, 2.0}) {
      const Field ut = solve_interior_source(F * t, setup.mask, op, opt).solution;
      const Field expect = u1 * std::pow(t, 1.0 / (p - 1.0));
      worst_h = std::max(worst_h, max_abs_diff(ut, expect) / max_abs(expect));
    }
  }
  c.le("homogeneity rel error", worst_h, 1e-8);
  return c;
}

Check criterion_poincare() {
  Check c;
  const LineSetup line;
  const double s = 0.5;
  PoincareOptions opt;
  opt.tol = 1e-9;
  const PoincareResult lin = poincare_eigenpair(line.mask, s, 2.0, opt);
  const double dense = dense_first_eigenvalue(line.mask, dense_linear_operator(line.grid, s));
  c.le("p=2 rel dev vs dense eigenvalue", std::abs(lin.lambda1 - dense) / dense, 1e-6);

  double worst_res = 0.0;
  bool sharp = true;
  bool monotone = true;
  const DomainMask inner = DomainMask::boxes(line.grid, {{20, 44, 0, 1}});
  std::mt19937_64 rng(6);
  for (double p : {1.5, 2.0, 3.0}) {
    const PoincareResult r = p == 2.0 ? lin : poincare_eigenpair(line.mask, s, p, opt);
    worst_res = std::max(worst_res, eigen_residual(r.minimizer, r.lambda1, line.mask, s, p));
    sharp = sharp && r.converged &&
            std::abs(rayleigh_quotient(r.minimizer, s, p) - r.lambda1) <= 1e-8 * r.lambda1;
    for (int k = 0; k < 10; ++k) {
      const Field v = restrict_to_interior(smooth_random(line.grid, rng), line.mask);
      sharp = sharp && rayleigh_lower_bound_check(v, rayleigh_quotient(v, s, p), line.mask, r, opt.tol);
    }
    const PoincareResult small = poincare_eigenpair(inner, s, p, opt);
    monotone = monotone && small.lambda1 >= r.lambda1 * (1.0 - 1e-8);
  }
  c.le("max Euler-Lagrange residual", worst_res, 1e-6);
  c.add("sharpness checks", sharp ? 1.0 : 0.0, 1.0, sharp);
  c.add("domain monotonicity", monotone ? 1.0 : 0.0, 1.0, monotone);
  return c;
}

Check criterion_gradient() {
  Check c;
  const GridSpec grid(2, 16, kTwoPi);
  std::mt19937_64 rng(7);
  double worst = 0.0;
  int checked = 0;
  for (double p : {1.5, 2.0, 3.0}) {
    const double eps = p < 2.0 ? 1e-2 : 0.0;
    const EnergyOperator op(AnisotropyField::constant(grid, 1, 1.5), 0.5, p);
    const Field u = smooth_random(grid, rng);
    Field g(grid, 1);
    op.energy_and_gradient(u, eps, g);
    const int count = p == 3.0 ? 34 : 33;
    for (int k = 0; k < count; ++k, ++checked) {
      const Field v = smooth_random(grid, rng);
      // Fourth-order central difference.
      const double delta = 1e-4;
      auto e = [&](double t) { return op.energy(u + v * t, eps); };
      const double fd = (8.0 * (e(delta) - e(-delta)) - (e(2.0 * delta) - e(-2.0 * delta))) / (12.0 * delta);
      const double an = l2_inner(g, v);
      worst = std::max(worst, std::abs(fd - an) / std::abs(an));
    }
  }
  c.le("max rel FD error over " + std::to_string(checked) + " directions", worst, 1e-6);
  return c;
}

Check criterion_dn() {
  Check c;
  const LineSetup setup;
  std::mt19937_64 rng(8);
  double worst_slope = 0.0;
  double worst_quot = 0.0;
  for (double p : {1.5, 2.0, 3.0}) {
    SolverOptions opt;
    opt.tol = 1e-12;
    DnContext ctx(setup.mask, EnergyOperator(AnisotropyField::identity(setup.grid, 1), 0.5, p), opt);
    const TraceDatum f(smooth_random(setup.grid, rng), setup.mask);
    const std::vector<double> ts = {0.5, 1.0, 2.0, 4.0};
    std::vector<double> lx;
    std::vector<double> ly;
    for (double t : ts) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(dn_pair(ctx, TraceDatum(f.field() * t, setup.mask), f)));
    }
    const double mx = (lx[0] + lx[1] + lx[2] + lx[3]) / 4.0;
    const double my = (ly[0] + ly[1] + ly[2] + ly[3]) / 4.0;
    double sxy = 0.0;
    double sxx = 0.0;
    for (int i = 0; i < 4; ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    worst_slope = std::max(worst_slope, std::abs(sxy / sxx - (p - 1.0)));

    const TraceDatum g(smooth_random(setup.grid, rng), setup.mask);
    const Field phi = restrict_to_interior(smooth_random(setup.grid, rng), setup.mask);
    const QuotientCheck q = quotient_independence_check(ctx, f, g, phi);
    worst_quot = std::max(worst_quot, q.deviation / q.slack);
  }
  c.le("|slope - (p-1)|", worst_slope, 1e-6);
  c.le("quotient deviation / slack", worst_quot, 1.0);

  const GridSpec grid(1, 32, kTwoPi);
  const DomainMask mask = DomainMask::boxes(grid, {{8, 24, 0, 1}});
  SolverOptions opt;
  opt.tol = 1e-13;
  DnContext ctx(mask, EnergyOperator(AnisotropyField::identity(grid, 1), 0.5, 2.0), opt);
  const Eigen::MatrixXd M = dn_matrix_linear(ctx);
  const Eigen::MatrixXd S = dense_dn_matrix(mask, dense_linear_operator(grid, 0.5));
  const double scale = S.cwiseAbs().maxCoeff();
  c.le("DN matrix asymmetry", (M - M.transpose()).cwiseAbs().maxCoeff() / scale, 1e-9);
  c.le("DN matrix vs Schur complement", (M - S).cwiseAbs().maxCoeff() / scale, 1e-8);
  return c;
}

Check criterion_sandwich() {
  Check c;
  const LineSetup setup;
  const std::vector<double> ps = {1.5, 2.0, 3.0};
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int failures = 0;
  double worst = -std::numeric_limits<double>::infinity();
  const double N = setup.grid.points_per_axis();
  for (int k = 0; k < 100; ++k) {
    const double p = ps[k % 3];
    std::vector<double> s2(setup.grid.size());
    std::vector<double> s1(setup.grid.size());
    const double a = 1.0 + unif(rng);
    const double b = 0.5 * unif(rng);
    const double c0 = 16 + 32 * unif(rng);
    const double width = 2.0 + 10.0 * unif(rng);
    const double bump = 0.1 + 2.0 * unif(rng);
    for (std::size_t i = 0; i < setup.grid.size(); ++i) {
      s2[i] = a + b * std::sin(kTwoPi * i / N);
      const double d = (static_cast<double>(i) - c0) / width;
      s1[i] = s2[i] + bump * std::exp(-d * d);
    }
    const ConformalCoefficient sig1(setup.grid, s1, 0.5);
    const ConformalCoefficient sig2(setup.grid, s2, 0.5);
    const Field u0 = smooth_random(setup.grid, rng);
    SolverOptions opt;
    opt.tol = 1e-9;
    opt.budget = 20000;
    const SandwichResult r = monotonicity_bounds(TraceDatum(u0, setup.mask), sig1, sig2,
                                                 AnisotropyField::identity(setup.grid, 1), setup.mask, 0.5, p, opt);
    if (!r.holds()) ++failures;
    const double excess = std::max(r.lower - r.gap, r.gap - r.upper);
    worst = std::max(worst, excess / std::max(r.slack, 1e-300));
  }
  c.add("sandwich failures / 100", failures, 0.0, failures == 0);
  c.note("max (bound violation) / slack = " + sci(worst));

  const auto two = ConformalCoefficient::constant(setup.grid, 2.0, 1.0);
  const auto one = ConformalCoefficient::constant(setup.grid, 1.0, 1.0);
  SolverOptions opt;
  opt.tol = 1e-10;
  const Field u0 = smooth_random(setup.grid, rng);
  const SandwichResult r = monotonicity_bounds(TraceDatum(u0, setup.mask), two, one,
                                               AnisotropyField::identity(setup.grid, 1), setup.mask, 0.5, 2.0, opt);
  c.le("|lower/upper - 1/2|", std::abs(r.lower / r.upper - 0.5), 1e-6);
  return c;
}

Check criterion_inverse() {
  Check c;
  const SquareSetup setup;
  const GridSpec& grid = setup.grid;
  const AnisotropyField A = AnisotropyField::identity(grid, 1);
  const BlockPartition blocks = tile_blocks(grid, {8, 24, 8, 24}, 4);
  SolverOptions opt;
  opt.tol = 1e-9;

  std::vector<std::size_t> window;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto x = grid.multi_index(k);
    const bool outer = x[0] >= 3 && x[0] < 29 && x[1] >= 3 && x[1] < 29;
    const bool inner = x[0] >= 7 && x[0] < 25 && x[1] >= 7 && x[1] < 25;
    if (outer && !inner) window.push_back(k);
  }
  const std::vector<Field> probe_fields = window_probes(grid, window, 8, 3.0, 20240611);

  const auto background = ConformalCoefficient::constant(grid, 1.0, 1.0);
  int flagged = 0;
  int verified = 0;
  for (std::size_t b = 0; b < blocks.blocks.size(); ++b) {
    std::vector<double> v(grid.size(), 1.0);
    for (std::size_t i : blocks.blocks[b]) v[i] = 2.0;
    const ConformalCoefficient sig1(grid, v, 1.0);
    const auto r = single_measurement_experiment(sig1, background, A, setup.mask, 0.5, 2.0, probe_fields[0],
                                                 blocks, opt);
    flagged += r.gap_positive ? 1 : 0;
    verified += r.verified ? 1 : 0;
  }
  const auto same = single_measurement_experiment(background, background, A, setup.mask, 0.5, 2.0,
                                                  probe_fields[0], blocks, opt);
  const int n = static_cast<int>(blocks.blocks.size());
  c.add("inclusion configs with gap > slack", flagged, n, flagged == n && verified == n);
  c.add("equal-coefficient gap / slack", std::abs(same.gap) / same.slack, 1.0, same.verified);

  std::vector<double> truth(grid.size(), 1.0);
  const std::size_t target = 6;
  for (std::size_t i : blocks.blocks[target]) truth[i] = 2.0;
  MeasurementOracle oracle(setup.mask, A, 0.5, 2.0, ConformalCoefficient(grid, truth, 1.0), opt);
  std::vector<TraceDatum> probes;
  for (const Field& f : probe_fields) probes.emplace_back(f, setup.mask);
  std::vector<double> levels;
  for (int k = 0; k < 8; ++k) levels.push_back(1.0 + 0.25 * k);
  const SigmaEstimate est = reconstruct_sigma(oracle, probes, blocks, levels, setup.mask, A, 0.5, 2.0, opt);
  double worst = 0.0;
  for (std::size_t b = 0; b < blocks.blocks.size(); ++b) {
    const double expect = b == target ? 2.0 : 1.0;
    worst = std::max(worst, std::abs(est.estimate[b] - expect) / expect);
  }
  c.le("max per-block reconstruction rel error", worst, 5e-2);
  c.note(std::to_string(est.simulations) + " simulated coefficients");
  return c;
}

Check criterion_beta() {
  Check c;
  const SquareSetup setup;
  const GridSpec& grid = setup.grid;
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (double p : {1.5, 2.0, 3.0}) {
    std::vector<double> v1(grid.size());
    std::vector<double> v2(grid.size());
    std::uniform_real_distribution<double> unif(1.0, 2.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      v2[i] = unif(rng);
      v1[i] = v2[i] * (1.0 + 1e-3);
    }
    const ConformalCoefficient sig1(grid, v1, 1.0);
    const ConformalCoefficient sig2(grid, v2, 1.0);
    const EnergyOperator op(AnisotropyField::identity(grid, 1), 0.5, p);
    SolverOptions opt;
    opt.tol = 1e-9;
    const Field u2 = solve_exterior_value(smooth_random(grid, rng), setup.mask, op.with_conformal(sig2), opt).solution;
    const std::vector<double> rho = op.density(op.half_laplacian(u2));
    const BetaScan scan = beta_scan(sig1, sig2, rho, p, grid.cell_volume(), 0.2, 0.01);
    worst = std::max(worst, std::abs(scan.argmax - (p - 1.0)));
  }
  c.le("max |argmax beta - (p-1)|", worst, 0.01 + 1e-12);
  return c;
}

struct Entry {
  int id;
  const char* title;
  std::function<Check()> run;
  double time_limit;  ///< seconds; 0 means none
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {1, "Poisson-kernel L^q norm identity", criterion_kernel_norms, 10.0},
      {2, "normal-trace recovery of the fractional Laplacian", criterion_normal_trace, 60.0},
      {3, "extension contraction in L^p", criterion_contraction, 0.0},
      {4, "linear-case dense oracle equivalence", criterion_linear_oracle, 30.0},
      {5, "stability estimate and source homogeneity", criterion_stability, 0.0},
      {6, "Poincare eigenpair", criterion_poincare, 0.0},
      {7, "energy gradient vs finite differences", criterion_gradient, 0.0},
      {8, "DN map properties", criterion_dn, 0.0},
      {9, "monotonicity sandwich", criterion_sandwich, 0.0},
      {10, "inverse experiments", criterion_inverse, 600.0},
      {11, "beta optimality of the lower bound", criterion_beta, 0.0},
  };
  return entries;
}

}  // namespace

std::vector<int> criterion_ids() {
  std::vector<int> ids;
  for (const auto& e : registry()) ids.push_back(e.id);
  return ids;
}

CriterionResult run_criterion(int id) {
  const auto it = std::find_if(registry().begin(), registry().end(), [id](const Entry& e) { return e.id == id; });
  if (it == registry().end()) throw std::out_of_range("unknown criterion " + std::to_string(id));
  CriterionResult r;
  r.id = id;
  r.title = it->title;
  const auto start = std::chrono::steady_clock::now();
  try {
    Check c = it->run();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.passed = c.ok;
    r.measured = c.text.str();
    if (it->time_limit > 0.0) {
      r.measured += "; runtime limit " + sci(it->time_limit) + " s";
      r.passed = r.passed && r.seconds < it->time_limit;
    }
  } catch (const std::exception& e) {
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.passed = false;
    r.measured = std::string("error: ") + e.what();
  }
  return r;
}

std::string format_result(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%s  C%-2d %s: ", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str());
  char tail[48];
  std::snprintf(tail, sizeof tail, "  (%.2f s)", r.seconds);
  return head + r.measured + tail;
}

}  // namespace fpb::verification
