#pragma once

/// @file criteria.hpp
/// @brief The acceptance suite. Each criterion runs its experiment, compares
/// against an independent oracle and reports the measured quantities.

#include <string>
#include <vector>

namespace fpb::verification {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string measured;   ///< human-readable measured values and tolerances
  double seconds = 0.0;
};

/// Criterion ids in run order (1 .. 11).
std::vector<int> criterion_ids();

/// Runs one criterion; unknown ids throw std::out_of_range. Exceptions raised
/// by the experiment are caught and reported as a failure.
CriterionResult run_criterion(int id);

/// "PASS  C<id>  <title>  <measured>  (<seconds> s)".
std::string format_result(const CriterionResult& r);

}  // namespace fpb::verification
