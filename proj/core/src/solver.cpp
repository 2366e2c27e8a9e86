#include "fpb/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "fpb/optimizer.hpp"

namespace fpb {

DomainMask::DomainMask(GridSpec grid, std::vector<std::uint8_t> interior)
    : grid_(grid), interior_(std::move(interior)) {
  if (interior_.size() != grid_.size()) {
    throw std::invalid_argument("DomainMask: expected one flag per grid point");
  }
  for (std::size_t i = 0; i < interior_.size(); ++i) {
    (interior_[i] ? interior_points_ : exterior_points_).push_back(i);
  }
  if (interior_points_.empty()) throw std::invalid_argument("DomainMask: interior is empty");
  if (exterior_points_.empty()) throw std::invalid_argument("DomainMask: exterior is empty");
}

DomainMask DomainMask::boxes(const GridSpec& grid, const std::vector<IndexBox>& boxes) {
  const int n = grid.points_per_axis();
  std::vector<std::uint8_t> bits(grid.size(), 0);
  for (const auto& b : boxes) {
    const int j0 = grid.dim() == 1 ? 0 : b.j0;
    const int j1 = grid.dim() == 1 ? 1 : b.j1;
    if (b.i0 < 0 || b.i1 > n || b.i0 >= b.i1 || j0 < 0 || j1 > (grid.dim() == 1 ? 1 : n) || j0 >= j1) {
      throw std::invalid_argument("DomainMask: box outside the grid or empty");
    }
    for (int i = b.i0; i < b.i1; ++i) {
      for (int j = j0; j < j1; ++j) bits[grid.flat_index(i, j)] = 1;
    }
  }
  return DomainMask(grid, std::move(bits));
}

bool DomainMask::subset_of(const DomainMask& other) const {
  if (!(grid_ == other.grid_)) return false;
  for (std::size_t i : interior_points_) {
    if (!other.interior(i)) return false;
  }
  return true;
}

Field restrict_to_interior(const Field& u, const DomainMask& mask) {
  Field out = u;
  for (std::size_t i : mask.exterior_points()) {
    for (int c = 0; c < u.components(); ++c) out(i, c) = 0.0;
  }
  return out;
}

Field restrict_to_exterior(const Field& u, const DomainMask& mask) {
  Field out = u;
  for (std::size_t i : mask.interior_points()) {
    for (int c = 0; c < u.components(); ++c) out(i, c) = 0.0;
  }
  return out;
}

namespace {

void check_inputs(const Field& data, const DomainMask& mask, const EnergyOperator& op, double tol) {
  if (!(data.grid() == op.grid()) || !(mask.grid() == op.grid())) {
    throw std::invalid_argument("solver: grid mismatch between data, mask and operator");
  }
  if (data.components() != op.components()) {
    throw std::invalid_argument("solver: data has " + std::to_string(data.components()) +
                                " components, operator expects " + std::to_string(op.components()));
  }
  if (!(tol > 0.0)) throw std::invalid_argument("solver: tolerance must be positive");
  if (!data.is_finite()) throw std::invalid_argument("solver: data contains non-finite values");
}

// Interior-DOF view of the constrained energy.
class RestrictedProblem {
 public:
  RestrictedProblem(const EnergyOperator& op, const DomainMask& mask, Field base, const Field* source)
      : op_(op), mask_(mask), base_(std::move(base)), source_(source), scratch_(base_), grad_(base_) {}

  std::size_t size() const { return mask_.interior_count() * op_.components(); }

  void scatter(const std::vector<double>& x, Field& u) const {
    const int m = op_.components();
    const auto& ip = mask_.interior_points();
    for (std::size_t k = 0; k < ip.size(); ++k) {
      for (int c = 0; c < m; ++c) u(ip[k], c) = x[k * m + c];
    }
  }

  std::vector<double> gather(const Field& u) const {
    const int m = op_.components();
    const auto& ip = mask_.interior_points();
    std::vector<double> x(size());
    for (std::size_t k = 0; k < ip.size(); ++k) {
      for (int c = 0; c < m; ++c) x[k * m + c] = u(ip[k], c);
    }
    return x;
  }

  Field assemble(const std::vector<double>& x) const {
    Field u = base_;
    scatter(x, u);
    return u;
  }

  // Energy scaled by 1/cellvol minus the source pairing, and its gradient.
  double evaluate(const std::vector<double>& x, std::vector<double>& g, double eps) {
    scatter(x, scratch_);
    const double energy = op_.energy_and_gradient(scratch_, eps, grad_);
    const int m = op_.components();
    const auto& ip = mask_.interior_points();
    double value = energy / op_.grid().cell_volume();
    for (std::size_t k = 0; k < ip.size(); ++k) {
      for (int c = 0; c < m; ++c) {
        double gk = grad_(ip[k], c);
        if (source_ != nullptr) {
          const double f = (*source_)(ip[k], c);
          gk -= f;
          value -= f * x[k * m + c];
        }
        g[k * m + c] = gk;
      }
    }
    return value;
  }

 private:
  const EnergyOperator& op_;
  const DomainMask& mask_;
  Field base_;
  const Field* source_;
  Field scratch_;
  Field grad_;
};

std::vector<double> default_schedule(double p) {
  if (p < 2.0) return {1e-2, 1e-4, 1e-6, 0.0};
  return {0.0};
}

// Conjugate gradients on the interior block of the p = 2 operator with the
// same anisotropy and conformal factor: the linear extension of u0.
Field linear_extension(const Field& u0, const DomainMask& mask, const EnergyOperator& op, double tol) {
  const EnergyOperator lin(op.anisotropy(), op.s(), 2.0, op.conformal());
  const int m = op.components();
  const auto& ip = mask.interior_points();
  const std::size_t n = ip.size() * m;
  Field base = restrict_to_exterior(u0, mask);
  Field work = lin.apply(base);
  std::vector<double> b(n), x(n, 0.0), r(n), d(n), q(n);
  for (std::size_t k = 0; k < ip.size(); ++k) {
    for (int c = 0; c < m; ++c) b[k * m + c] = -work(ip[k], c);
  }
  auto apply_block = [&](const std::vector<double>& v, std::vector<double>& out) {
    Field t(op.grid(), m);
    for (std::size_t k = 0; k < ip.size(); ++k) {
      for (int c = 0; c < m; ++c) t(ip[k], c) = v[k * m + c];
    }
    const Field kt = lin.apply(t);
    for (std::size_t k = 0; k < ip.size(); ++k) {
      for (int c = 0; c < m; ++c) out[k * m + c] = kt(ip[k], c);
    }
  };
  r = b;
  d = r;
  double rr = 0.0;
  for (double v : r) rr += v * v;
  const double stop = std::pow(std::min(tol, 1e-6) * 1e-2, 2) * std::max(rr, 1e-300);
  for (std::size_t it = 0; it < 4 * n + 50 && rr > stop; ++it) {
    apply_block(d, q);
    double dq = 0.0;
    for (std::size_t i = 0; i < n; ++i) dq += d[i] * q[i];
    if (!(dq > 0.0)) break;
    const double alpha = rr / dq;
    double rr_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * d[i];
      r[i] -= alpha * q[i];
      rr_new += r[i] * r[i];
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) d[i] = r[i] + beta * d[i];
  }
  for (std::size_t k = 0; k < ip.size(); ++k) {
    for (int c = 0; c < m; ++c) base(ip[k], c) = x[k * m + c];
  }
  return base;
}

SolveReport run(const EnergyOperator& op, const DomainMask& mask, Field base, const Field* source,
                Field initial, const SolverOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  RestrictedProblem problem(op, mask, std::move(base), source);
  std::vector<double> x = problem.gather(initial);

  const auto schedule = opt.eps_schedule.empty() ? default_schedule(op.p()) : opt.eps_schedule;
  std::size_t budget = opt.budget;
  if (budget == 0) budget = 10 * op.grid().size();

  SolveReport report(problem.assemble(x));
  bool stage_ok = true;
  std::string message = "converged";
  std::size_t used = 0;
  double eps_used = 0.0;
  for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
    const double eps = schedule[stage];
    if (eps < 0.0) throw std::invalid_argument("solver: smoothing parameters must be >= 0");
    eps_used = eps;
    LbfgsOptions lo;
    const bool last = stage + 1 == schedule.size();
    // Intermediate smoothing stages only need to land near their minimizer.
    lo.gradient_tol = last ? opt.tol : std::max(opt.tol, 1e-6);
    lo.energy_rtol = std::max(opt.tol * opt.tol, 64.0 * 2.220446049250313e-16);
    lo.memory = opt.memory;
    lo.max_iterations = budget > used ? budget - used : 0;
    const auto objective = [&](const std::vector<double>& xv, std::vector<double>& g) {
      return problem.evaluate(xv, g, eps);
    };
    const LbfgsResult r = lbfgs_minimize(objective, x, lo);
    used += r.iterations;
    report.energy_history.insert(report.energy_history.end(), r.history.begin(), r.history.end());
    if (!r.converged) {
      stage_ok = false;
      message = r.message + " (smoothing " + std::to_string(eps) + ")";
      if (last || r.message == "iteration budget exhausted") break;
    }
  }

  report.solution = problem.assemble(x);
  std::vector<double> g(x.size());
  report.energy = problem.evaluate(x, g, 0.0) * op.grid().cell_volume();
  report.iterations = used;
  report.epsilon = eps_used;
  report.gradient_norm = residual_sup(report.solution, source, mask, op);
  report.residual = weak_residual(report.solution, source, mask, op, opt.residual_directions,
                                  opt.residual_seed);
  report.converged = stage_ok && report.gradient_norm <= opt.tol;
  if (stage_ok && !report.converged) {
    message = "smoothed minimizer misses the exact residual bound";
  }
  report.message = message;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace

double residual_sup(const Field& u, const Field* F, const DomainMask& mask, const EnergyOperator& op) {
  const Field g = op.apply(u);
  double out = 0.0;
  for (std::size_t i : mask.interior_points()) {
    for (int c = 0; c < u.components(); ++c) {
      const double r = g(i, c) - (F ? (*F)(i, c) : 0.0);
      out = std::max(out, std::abs(r));
    }
  }
  return out;
}

double weak_residual(const Field& u, const Field* F, const DomainMask& mask, const EnergyOperator& op,
                     int directions, std::uint64_t seed) {
  const Field g = op.apply(u);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double out = 0.0;
  for (int d = 0; d < directions; ++d) {
    double pair = 0.0;
    double l1 = 0.0;
    for (std::size_t i : mask.interior_points()) {
      for (int c = 0; c < u.components(); ++c) {
        const double v = normal(rng);
        pair += (g(i, c) - (F ? (*F)(i, c) : 0.0)) * v;
        l1 += std::abs(v);
      }
    }
    if (l1 > 0.0) out = std::max(out, std::abs(pair) / l1);
  }
  return out;
}

SolveReport solve_interior_source(const Field& F, const DomainMask& mask, const EnergyOperator& op,
                                  const SolverOptions& options) {
  check_inputs(F, mask, op, options.tol);
  Field base(op.grid(), op.components());
  Field init = options.initial ? restrict_to_interior(*options.initial, mask) : base;
  return run(op, mask, base, &F, init, options);
}

SolveReport solve_interior_source(const Field& F, const DomainMask& mask, const AnisotropyField& A,
                                  double s, double p, double tol) {
  SolverOptions o;
  o.tol = tol;
  return solve_interior_source(F, mask, EnergyOperator(A, s, p), o);
}

SolveReport solve_exterior_value(const Field& u0, const DomainMask& mask, const EnergyOperator& op,
                                 const SolverOptions& options) {
  check_inputs(u0, mask, op, options.tol);
  Field base = restrict_to_exterior(u0, mask);
  Field init = options.initial ? base + restrict_to_interior(*options.initial, mask)
                               : linear_extension(u0, mask, op, options.tol);
  return run(op, mask, base, nullptr, init, options);
}

SolveReport solve_exterior_value(const Field& u0, const DomainMask& mask, const AnisotropyField& A,
                                 double s, double p, double tol) {
  SolverOptions o;
  o.tol = tol;
  return solve_exterior_value(u0, mask, EnergyOperator(A, s, p), o);
}

UniquenessReport uniqueness_probe(const DomainMask& mask, const EnergyOperator& op, const Field& data,
                                  ProblemKind kind, const std::vector<std::uint64_t>& seeds,
                                  const SolverOptions& options) {
  if (seeds.size() < 2) throw std::invalid_argument("uniqueness_probe: need at least two seeds");
  UniquenessReport out;
  double scale = 1.0;
  for (double v : data.values()) scale = std::max(scale, std::abs(v));
  for (std::uint64_t seed : seeds) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    Field init(op.grid(), op.components());
    for (std::size_t i : mask.interior_points()) {
      for (int c = 0; c < op.components(); ++c) init(i, c) = normal(rng);
    }
    SolverOptions o = options;
    o.initial = init;
    out.solves.push_back(kind == ProblemKind::InteriorSource ? solve_interior_source(data, mask, op, o)
                                                             : solve_exterior_value(data, mask, op, o));
    if (!out.solves.back().converged) {
      throw std::runtime_error("uniqueness_probe: solve from seed " + std::to_string(seed) +
                               " failed: " + out.solves.back().message);
    }
  }
  double magnitude = 0.0;
  for (std::size_t a = 0; a < out.solves.size(); ++a) {
    magnitude = std::max(magnitude, lp_norm(op.half_laplacian(out.solves[a].solution), op.p()));
    for (std::size_t b = a + 1; b < out.solves.size(); ++b) {
      const Field diff = out.solves[a].solution - out.solves[b].solution;
      out.max_distance = std::max(out.max_distance, lp_norm(op.half_laplacian(diff), op.p()));
    }
  }
  out.slack = 10.0 * std::pow(options.tol, 1.0 / std::max(op.p() - 1.0, 1.0)) * std::max(1.0, magnitude);
  return out;
}

}  // namespace fpb
