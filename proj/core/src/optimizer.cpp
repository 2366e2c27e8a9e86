#include "fpb/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace fpb {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sup_norm(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion: d = -H g.
void two_loop(const std::deque<Pair>& memory, const std::vector<double>& g, std::vector<double>& d) {
  d = g;
  std::vector<double> alpha(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    const Pair& pr = memory[k];
    alpha[k] = pr.rho * dot(pr.s, d);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= alpha[k] * pr.y[i];
  }
  if (!memory.empty()) {
    const Pair& last = memory.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : d) v *= gamma;
  }
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const Pair& pr = memory[k];
    const double beta = pr.rho * dot(pr.y, d);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += (alpha[k] - beta) * pr.s[i];
  }
  for (double& v : d) v = -v;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double>& x, const LbfgsOptions& opt) {
  if (opt.memory < 1) throw std::invalid_argument("lbfgs: memory must be >= 1");
  const std::size_t n = x.size();
  LbfgsResult res;
  std::vector<double> g(n), g_new(n), x_new(n), d(n);

  double fx = f(x, g);
  ++res.evaluations;
  if (opt.retraction) {
    const double a = opt.retraction(x);
    if (a != 1.0) {
      fx = f(x, g);
      ++res.evaluations;
    }
  }
  res.history.push_back(fx);
  std::deque<Pair> memory;
  double step_hint = 1.0;

  auto stationary = [&](const std::vector<double>& grad) { return opt.gradient_scale * sup_norm(grad); };

  auto energy_settled = [&]() {
    const std::size_t k = res.history.size() - 1;
    if (k == 0) return true;
    const std::size_t back = std::min<std::size_t>(k, static_cast<std::size_t>(opt.window));
    const double old = res.history[k - back];
    const double now = res.history[k];
    const double scale = std::max(std::abs(old), std::abs(now));
    return std::abs(old - now) <= opt.energy_rtol * scale || scale == 0.0;
  };

  for (;;) {
    const double gsup = stationary(g);
    res.gradient_sup = gsup;
    res.value = fx;
    if (!std::isfinite(fx) || !std::isfinite(gsup)) {
      res.message = "non-finite objective or gradient";
      return res;
    }
    if (gsup <= opt.gradient_tol && energy_settled()) {
      res.converged = true;
      res.message = "converged";
      return res;
    }
    if (res.iterations >= opt.max_iterations) {
      res.message = "iteration budget exhausted";
      return res;
    }

    two_loop(memory, g, d);
    double gd = dot(g, d);
    if (!(gd < 0.0)) {
      memory.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      gd = dot(g, d);
    }
    if (gd == 0.0) {
      res.converged = gsup <= opt.gradient_tol;
      res.message = res.converged ? "converged" : "zero search direction";
      return res;
    }

    double alpha = memory.empty() ? std::min(1.0, step_hint / std::max(sup_norm(d), 1e-300)) : 1.0;
    if (memory.empty() && res.iterations == 0) alpha = 1.0 / std::max(1.0, sup_norm(d));
    const double noise = 1e-13 * std::max(std::abs(fx), std::numeric_limits<double>::min());
    bool accepted = false;
    double f_new = fx;
    for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + alpha * d[i];
      f_new = f(x_new, g_new);
      ++res.evaluations;
      if (std::isfinite(f_new)) {
        const bool armijo = f_new <= fx + opt.armijo * alpha * gd;
        // Approximate Wolfe acceptance: once the decrease is lost in round-off,
        // accept a step that reduces the directional derivative magnitude.
        const bool approx = std::abs(f_new - fx) <= noise &&
                            std::abs(dot(g_new, d)) <= std::abs(gd) * (1.0 - opt.armijo);
        if (armijo || approx) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      res.message = "line search failed";
      res.converged = false;
      return res;
    }

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = x_new[i] - x[i];
    x.swap(x_new);
    fx = f_new;
    g.swap(g_new);  // g_new now holds the gradient at the previous iterate
    if (opt.retraction) {
      const double a = opt.retraction(x);
      if (a != 1.0) {
        // Express the history in the rescaled coordinates: x -> a x, g -> g / a.
        fx = f(x, g);
        ++res.evaluations;
        for (auto& pr : memory) {
          for (double& v : pr.s) v *= a;
          for (double& v : pr.y) v /= a;
          pr.rho = 1.0 / dot(pr.s, pr.y);
        }
        for (double& v : s) v *= a;
        for (double& v : g_new) v /= a;
      }
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = g[i] - g_new[i];
    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y)) && sy > 0.0) {
      memory.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (memory.size() > static_cast<std::size_t>(opt.memory)) memory.pop_front();
    }
    step_hint = alpha * sup_norm(d);
    ++res.iterations;
    res.history.push_back(fx);
  }
}

}  // namespace fpb
