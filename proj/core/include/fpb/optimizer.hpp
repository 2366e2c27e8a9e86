#pragma once

/// @file optimizer.hpp
/// @brief Limited-memory BFGS with a backtracking line search that stays
/// robust when energy differences sink below round-off.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace fpb {

/// Objective callback: returns f(x) and writes the gradient into g.
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>& g)>;

/// Optional retraction applied after every accepted step. It may rescale x
/// in place and returns the factor a with x_new = a * x_old (1 if untouched).
/// The optimizer assumes f is invariant under the rescaling, so gradients
/// transform as g -> g / a.
using Retraction = std::function<double(std::vector<double>& x)>;

struct LbfgsOptions {
  double gradient_tol = 1e-8;       ///< stop when gradient_scale * |g|_inf <= gradient_tol
  double gradient_scale = 1.0;
  double energy_rtol = 1e-16;       ///< relative decrease over the last `window` iterations
  int window = 5;
  std::size_t max_iterations = 1000;
  int memory = 10;
  double armijo = 1e-4;
  int max_backtracks = 50;
  Retraction retraction;            ///< empty = none
};

struct LbfgsResult {
  double value = 0.0;
  double gradient_sup = 0.0;        ///< gradient_scale * |g|_inf at the returned point
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::string message;
  std::vector<double> history;      ///< objective after every accepted iterate
};

/// Minimizes f starting from x (overwritten with the final iterate).
LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double>& x, const LbfgsOptions& options);

}  // namespace fpb
