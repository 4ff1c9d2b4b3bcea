#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fishpop/expression.hpp"
#include "fishpop/grid.hpp"
#include "fishpop/model.hpp"

namespace fishpop {

struct Scenario;

enum class BoundaryMode {
  /// dp/dl = 0 at l = 0 and l = L; the advective flux gamma p still crosses the walls.
  paper_neumann,
  /// d dp/dl - gamma p = 0 at both walls; conserves mass under growth-diffusion.
  zero_flux,
};

enum class CouplingMode {
  /// Boundary row at t_{k+1} from the biomass of the state at t_k.
  lagged,
  /// Iterate biomass and boundary row at t_{k+1} to a fixed point.
  fixed_point,
};

struct SolverOptions {
  BoundaryMode boundary = BoundaryMode::paper_neumann;
  CouplingMode coupling = CouplingMode::lagged;
  double fixed_point_tolerance = 1e-10;
  int fixed_point_max_iterations = 50;
  /// Worker threads for the per-cohort and per-cell loops; 0 keeps the runtime default.
  int threads = 1;
};

/// Extra right-hand side s_i(t,a,l) of the balance law, used to force a
/// known exact solution. Holds the closed-form part symbolically and the
/// reaction terms (mortality, migration) numerically through a copy of the
/// coefficients, so mortality and movement may be tables.
class SourceHook {
 public:
  SourceHook() = default;
  SourceHook(std::vector<Expression> transport_part, std::vector<Expression> exact, CoefficientSet coeffs);

  int regions() const { return static_cast<int>(transport_.size()); }
  double operator()(int region, double t, double a, double l) const;
  /// Exact density of the forced system (boundary and initial data).
  double exact(int region, double t, double a, double l) const;
  const std::vector<Expression>& exact_solution() const { return exact_; }

 private:
  std::vector<Expression> transport_;
  std::vector<Expression> exact_;
  CoefficientSet coeffs_;
};

/// Builds s_i = dp/dt + dp/da - d/dl(d dp/dl) + d/dl(gamma p) + z p - (M p)_i
/// for the closed-form `exact` densities. Dispersion and growth must be
/// expressions; throws NumericalError when a term cannot be differentiated.
SourceHook manufactured_source(const std::vector<Expression>& exact, const CoefficientSet& coeffs);

/// One backward-Euler step of growth and dispersion in length for a single
/// (region, age) profile: diffusion with face coefficient (d_m + d_{m+1})/2,
/// first-order upwind flux of gamma p chosen by the sign of the face value,
/// wall closure per `mode`. Conservative node-centred finite volumes; the
/// tridiagonal system is an M-matrix and is solved by Thomas elimination.
/// Under paper_neumann, inflow through a wall is taken from the old profile.
void advection_diffusion_substep(std::span<double> profile, const CoefficientSet& coeffs, int region,
                                 const Grid& grid, double t, double a, double dt, BoundaryMode mode);

/// profile *= exp(-(mu + f) dt) nodewise.
void mortality_substep(std::span<double> profile, const CoefficientSet& coeffs, int region, const Grid& grid, double t,
                       double a, double dt);

/// Solves (I - dt M) x = p in place (implicit Euler for migration).
void migration_substep(std::span<double> cell, const MovementMatrix& M, double dt);

/// Per-step diagnostics, all per region.
struct StepRecord {
  /// Abundance that left through a = A during the step (trapezoid in time).
  std::vector<double> exiting;
  int fixed_point_iterations = 0;
};

/// Advances the state from t_k to t_{k+1}: growth-diffusion, mortality and
/// migration on every cohort a_j < A (coefficients at (t_k, a_j, l_m)), then
/// the explicit source dt s_i, the shift a_j -> a_{j+1}, and the new a = 0 row
/// (recruitment, or the exact solution when the hook carries one). The old
/// a = A cohort leaves the domain.
State step(const State& state, const CoefficientSet& coeffs, const Grid& grid, const SolverOptions& options,
           const SourceHook* hook = nullptr, StepRecord* record = nullptr);

/// int int p_i dl da per region, trapezoid rule in both variables.
std::vector<double> region_totals(const State& state, const Grid& grid);
/// int p_i(t, 0, l) dl per region.
std::vector<double> recruitment_totals(const State& state, const Grid& grid);

struct SummaryRow {
  double t = 0.0;
  std::vector<double> biomass;
  std::vector<double> recruitment;
  std::vector<double> total;
  std::vector<double> exiting;
};

struct Trajectory {
  std::vector<SummaryRow> summary;  // Nt + 1 rows
  std::vector<State> snapshots;
  State final_state;
};

struct RunOptions {
  /// Overrides the scenario's solver options when set.
  std::optional<SolverOptions> solver;
  int threads = 1;
  /// Called with every state, including the initial one.
  std::function<void(const State&)> observer;
};

/// Solver options a scenario asks for.
SolverOptions solver_options(const Scenario& scenario);

/// Initial state: p0 at every node, or the exact solution for manufactured scenarios.
State initial_state(const Scenario& scenario, const Grid& grid);

/// Validates the scenario and integrates it to t = T. Throws ValidationError
/// if validation fails and NumericalError (with step and cell) on a
/// non-finite value.
Trajectory run(const Scenario& scenario, const RunOptions& options = {});

}  // namespace fishpop
