#pragma once

#include <vector>

#include "fishpop/scenario.hpp"

namespace fishpop {

/// Copy of the scenario with natural and fishing mortality of `region`
/// (0-based) multiplied by `factor` >= 1, so the total mortality can only grow.
Scenario bump_mortality(const Scenario& scenario, int region, double factor);

struct ComparisonReport {
  int steps = 0;
  /// Largest p_bumped - p_base over all entries and steps, with its location.
  double worst = 0.0;
  int step = 0;
  int region = 0;
  int age = 0;
  int length = 0;
  double max_abs_difference = 0.0;

  bool ok(double tolerance = 1e-12) const { return worst <= tolerance; }
};

/// Runs both scenarios (same grid) and compares every state entrywise.
ComparisonReport compare_runs(const Scenario& base, const Scenario& bumped, int threads = 1);

struct ConvergenceLevel {
  int Nt = 0;
  int Nl = 0;
  double dt = 0.0;
  double dl = 0.0;
  double error = 0.0;  // max-norm at t = T against the exact solution
  double order = 0.0;  // log2 of the error ratio to the previous level; NaN on the first
};

/// Manufactured-solution refinement study: level q runs with Nt 2^q and
/// Nl 2^q. Throws ValidationError if the scenario has no exact solution.
std::vector<ConvergenceLevel> convergence_study(const Scenario& scenario, int levels, int threads = 1);

}  // namespace fishpop
