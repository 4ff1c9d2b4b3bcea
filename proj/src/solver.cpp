#include "fishpop/solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "fishpop/errors.hpp"
#include "fishpop/recruitment.hpp"
#include "fishpop/scenario.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fishpop {

namespace {

// Thomas elimination; lower[0] and upper[n-1] are ignored.
void solve_tridiagonal(std::span<const double> lower, std::span<double> diag, std::span<double> upper,
                       std::span<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t m = 0; m < n; ++m) {
    if (m > 0) {
      const double f = lower[m] / diag[m - 1];
      diag[m] -= f * upper[m - 1];
      rhs[m] -= f * rhs[m - 1];
    }
    if (!(diag[m] != 0.0) || !std::isfinite(diag[m]))
      throw NumericalError("singular tridiagonal system at row " + std::to_string(m));
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t m = n - 1; m-- > 0;) rhs[m] = (rhs[m] - upper[m] * rhs[m + 1]) / diag[m];
}

// In-place Gaussian elimination of (I - dt M) x = cell without pivoting.
// I - dt M is column diagonally dominant with nonpositive off-diagonals, so
// elimination keeps that sign pattern and every operation adds nonnegative terms.
void solve_migration(std::span<double> cell, const MovementMatrix& M, double dt, std::vector<double>& work) {
  const int n = M.size();
  work.resize(static_cast<std::size_t>(n) * n);
  const auto A = [&](int i, int j) -> double& { return work[static_cast<std::size_t>(i) * n + j]; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = (i == j ? 1.0 : 0.0) - dt * M(i, j);
  for (int k = 0; k < n; ++k) {
    const double pivot = A(k, k);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) throw NumericalError("singular migration system");
    for (int i = k + 1; i < n; ++i) {
      const double f = A(i, k) / pivot;
      if (f == 0.0) continue;
      for (int j = k + 1; j < n; ++j) A(i, j) -= f * A(k, j);
      cell[i] -= f * cell[k];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = cell[i];
    for (int j = i + 1; j < n; ++j) s -= A(i, j) * cell[j];
    cell[i] = s / A(i, i);
  }
}

double length_integral(std::span<const double> profile, const Grid& grid) {
  double s = 0.0;
  for (int m = 0; m <= grid.Nl; ++m) s += grid.length_weight(m) * profile[m];
  return s;
}

// Exceptions must not escape an OpenMP region; the first one is kept and
// rethrown after the loop.
class ErrorSlot {
 public:
  template <class F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
#pragma omp critical(fishpop_error_slot)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

int resolve_threads(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

}  // namespace

void advection_diffusion_substep(std::span<double> profile, const CoefficientSet& coeffs, int region,
                                 const Grid& grid, double t, double a, double dt, BoundaryMode mode) {
  const int n = grid.length_nodes();
  if (static_cast<int>(profile.size()) != n) throw ValidationError("profile length does not match the grid");
  const auto& rc = coeffs.region(region);

  std::vector<double> gamma(n), disp(n), lower(n, 0.0), diag(n, 1.0), upper(n, 0.0);
  for (int m = 0; m < n; ++m) {
    const double l = grid.length(m);
    gamma[m] = rc.growth(t, a, l);
    disp[m] = rc.dispersion(t, a, l);
  }
  const auto scale = [&](int m) { return dt / grid.length_weight(m); };

  // Each interior face m+1/2 couples nodes m and m+1 through
  // F = -d_f (p_{m+1} - p_m)/dl + gamma_f^+ p_m - gamma_f^- p_{m+1}.
  for (int m = 0; m + 1 < n; ++m) {
    const double df = 0.5 * (disp[m] + disp[m + 1]) / grid.dl;
    const double gf = 0.5 * (gamma[m] + gamma[m + 1]);
    const double gp = std::max(gf, 0.0);
    const double gn = std::max(-gf, 0.0);
    const double cm = scale(m);
    const double cn = scale(m + 1);
    diag[m] += cm * (df + gp);
    upper[m] -= cm * (df + gn);
    diag[m + 1] += cn * (df + gn);
    lower[m + 1] -= cn * (df + gp);
  }

  std::vector<double> rhs(profile.begin(), profile.end());
  if (mode == BoundaryMode::paper_neumann) {
    // Wall flux gamma p: implicit when leaving the domain, explicit from the
    // old profile when entering it.
    const double g0 = gamma[0];
    const double gL = gamma[n - 1];
    if (g0 < 0.0)
      diag[0] -= scale(0) * g0;
    else
      rhs[0] += scale(0) * g0 * profile[0];
    if (gL > 0.0)
      diag[n - 1] += scale(n - 1) * gL;
    else
      rhs[n - 1] -= scale(n - 1) * gL * profile[n - 1];
  }

  solve_tridiagonal(lower, diag, upper, rhs);
  std::copy(rhs.begin(), rhs.end(), profile.begin());
}

void mortality_substep(std::span<double> profile, const CoefficientSet& coeffs, int region, const Grid& grid, double t,
                       double a, double dt) {
  const auto& rc = coeffs.region(region);
  for (std::size_t m = 0; m < profile.size(); ++m)
    profile[m] *= std::exp(-rc.total_mortality(t, a, grid.length(static_cast<int>(m))) * dt);
}

void migration_substep(std::span<double> cell, const MovementMatrix& M, double dt) {
  if (static_cast<int>(cell.size()) != M.size()) throw ValidationError("cell vector does not match the movement matrix");
  std::vector<double> work;
  solve_migration(cell, M, dt, work);
}

SourceHook::SourceHook(std::vector<Expression> transport_part, std::vector<Expression> exact, CoefficientSet coeffs)
    : transport_(std::move(transport_part)), exact_(std::move(exact)), coeffs_(std::move(coeffs)) {}

double SourceHook::exact(int region, double t, double a, double l) const { return exact_[region](t, a, l); }

double SourceHook::operator()(int i, double t, double a, double l) const {
  double s = transport_[i](t, a, l) + coeffs_.region(i).total_mortality(t, a, l) * exact_[i](t, a, l);
  const int n = regions();
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    if (const auto* in = coeffs_.movement(j, i)) s -= (*in)(t, a, l) * exact_[j](t, a, l);
    if (const auto* out = coeffs_.movement(i, j)) s += (*out)(t, a, l) * exact_[i](t, a, l);
  }
  return s;
}

SourceHook manufactured_source(const std::vector<Expression>& exact, const CoefficientSet& coeffs) {
  if (static_cast<int>(exact.size()) != coeffs.size())
    throw ValidationError("manufactured solution needs one expression per region");
  std::vector<Expression> transport;
  for (int i = 0; i < coeffs.size(); ++i) {
    const auto& rc = coeffs.region(i);
    const auto d = rc.dispersion.symbolic();
    const auto g = rc.growth.symbolic();
    if (!d || !g)
      throw NumericalError("region " + std::to_string(i + 1) +
                           ": manufactured sources need dispersion and growth as expressions");
    const Expression& p = exact[static_cast<std::size_t>(i)];
    const Expression flux = *g * p - *d * p.derivative(Variable::l);
    transport.push_back(p.derivative(Variable::t) + p.derivative(Variable::a) + flux.derivative(Variable::l));
  }
  return SourceHook(std::move(transport), exact, coeffs);
}

std::vector<double> region_totals(const State& state, const Grid& grid) {
  std::vector<double> out(static_cast<std::size_t>(state.regions()), 0.0);
  for (int i = 0; i < state.regions(); ++i)
    for (int j = 0; j <= grid.Na; ++j) out[i] += grid.age_weight(j) * length_integral(state.profile(i, j), grid);
  return out;
}

std::vector<double> recruitment_totals(const State& state, const Grid& grid) {
  std::vector<double> out(static_cast<std::size_t>(state.regions()), 0.0);
  for (int i = 0; i < state.regions(); ++i) out[i] = length_integral(state.profile(i, 0), grid);
  return out;
}

State step(const State& state, const CoefficientSet& coeffs, const Grid& grid, const SolverOptions& options,
           const SourceHook* hook, StepRecord* record) {
  state.check_shape(grid);
  const int N = state.regions();
  if (N != coeffs.size()) throw ValidationError("state and coefficients disagree on the region count");
  const int k = state.step;
  const double t = grid.time(k);
  const double t_next = grid.time(k + 1);
  const double dt = grid.dt;
  const int threads = resolve_threads(options.threads);

  State next(N, grid);
  next.step = k + 1;
  next.time = t_next;

  // Length dynamics and mortality: independent per (region, cohort).
  const int cohorts = grid.Na;
  ErrorSlot errors;
#pragma omp parallel for collapse(2) schedule(static) num_threads(threads)
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < cohorts; ++j)
      errors.run([&] {
        auto out = next.profile(i, j + 1);
        const auto in = state.profile(i, j);
        std::copy(in.begin(), in.end(), out.begin());
        advection_diffusion_substep(out, coeffs, i, grid, t, grid.age(j), dt, options.boundary);
        mortality_substep(out, coeffs, i, grid, t, grid.age(j), dt);
      });
  errors.rethrow();

  // Migration: independent per (cohort, length node).
  if (N > 1 && coeffs.has_movement()) {
    const int cells = cohorts * grid.length_nodes();
#pragma omp parallel num_threads(threads)
    {
      std::vector<double> cell(static_cast<std::size_t>(N)), work;
#pragma omp for schedule(static)
      for (int c = 0; c < cells; ++c) {
        const int j = c / grid.length_nodes();
        const int m = c % grid.length_nodes();
        errors.run([&] {
          const MovementMatrix M = movement_matrix_at(coeffs, t, grid.age(j), grid.length(m));
          for (int i = 0; i < N; ++i) cell[i] = next(i, j + 1, m);
          solve_migration(cell, M, dt, work);
          for (int i = 0; i < N; ++i) next(i, j + 1, m) = cell[i];
        });
      }
    }
    errors.rethrow();
  }

  if (hook && hook->regions() > 0) {
#pragma omp parallel for collapse(2) schedule(static) num_threads(threads)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < cohorts; ++j)
        for (int m = 0; m <= grid.Nl; ++m) next(i, j + 1, m) += dt * (*hook)(i, t, grid.age(j), grid.length(m));
  }

  if (record) {
    record->exiting.assign(static_cast<std::size_t>(N), 0.0);
    for (int i = 0; i < N; ++i)
      record->exiting[i] =
          0.5 * dt * (length_integral(state.profile(i, grid.Na), grid) + length_integral(next.profile(i, grid.Na), grid));
    record->fixed_point_iterations = 0;
  }

  // New a = 0 row.
  if (hook && !hook->exact_solution().empty()) {
    for (int i = 0; i < N; ++i)
      for (int m = 0; m <= grid.Nl; ++m) next(i, 0, m) = hook->exact(i, t_next, 0.0, grid.length(m));
    return next;
  }
  BiomassVector biomass = spawning_biomass(state, coeffs, grid, t);
  fill_recruitment_boundary(next, coeffs, grid, t_next, biomass);
  if (options.coupling == CouplingMode::fixed_point) {
    int it = 0;
    for (;;) {
      BiomassVector updated = spawning_biomass(next, coeffs, grid, t_next);
      double change = 0.0;
      for (int i = 0; i < N; ++i) change = std::max(change, std::abs(updated.values[i] - biomass.values[i]));
      biomass = std::move(updated);
      fill_recruitment_boundary(next, coeffs, grid, t_next, biomass);
      ++it;
      if (change <= options.fixed_point_tolerance) break;
      if (it >= options.fixed_point_max_iterations)
        throw NumericalError("recruitment fixed point did not converge in " + std::to_string(it) +
                             " iterations at step " + std::to_string(k + 1));
    }
    if (record) record->fixed_point_iterations = it;
  }
  return next;
}

SolverOptions solver_options(const Scenario& scenario) {
  SolverOptions o;
  o.boundary = scenario.boundary;
  o.coupling = scenario.coupling;
  o.fixed_point_tolerance = scenario.fixed_point_tolerance;
  o.fixed_point_max_iterations = scenario.fixed_point_max_iterations;
  return o;
}

State initial_state(const Scenario& scenario, const Grid& grid) {
  const int N = scenario.bounds.regions;
  State s(N, grid);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= grid.Na; ++j)
      for (int m = 0; m <= grid.Nl; ++m) {
        const double a = grid.age(j), l = grid.length(m);
        s(i, j, m) = scenario.manufactured ? (*scenario.manufactured)[i](0.0, a, l) : scenario.initial[i](0.0, a, l);
      }
  // p0 covers ages in (0, A); the a = 0 row obeys the recruitment law from t = 0 on.
  if (!scenario.manufactured)
    fill_recruitment_boundary(s, scenario.coefficients, grid, 0.0, spawning_biomass(s, scenario.coefficients, grid, 0.0));
  return s;
}

namespace {

void check_finite(const State& s, const Grid& grid) {
  for (int i = 0; i < s.regions(); ++i)
    for (int j = 0; j <= grid.Na; ++j)
      for (int m = 0; m <= grid.Nl; ++m)
        if (!std::isfinite(s(i, j, m)))
          throw NumericalError("non-finite density at step " + std::to_string(s.step) + ", region " +
                               std::to_string(i + 1) + ", age node " + std::to_string(j) + ", length node " +
                               std::to_string(m));
}

SummaryRow summarize(const State& s, const CoefficientSet& coeffs, const Grid& grid, std::vector<double> exiting) {
  SummaryRow row;
  row.t = s.time;
  row.biomass = spawning_biomass(s, coeffs, grid, s.time).values;
  row.recruitment = recruitment_totals(s, grid);
  row.total = region_totals(s, grid);
  row.exiting = std::move(exiting);
  return row;
}

}  // namespace

Trajectory run(const Scenario& scenario, const RunOptions& options) {
  const Grid grid = build_grid(scenario.bounds, scenario.Nt, scenario.Nl);
  const CoefficientSet& coeffs = scenario.coefficients;
  if (!scenario.manufactured && static_cast<int>(scenario.initial.size()) != scenario.bounds.regions)
    throw ValidationError("initial condition needs one field per region");
  const std::span<const CoefficientField> initial =
      scenario.manufactured ? std::span<const CoefficientField>{} : std::span<const CoefficientField>(scenario.initial);
  const ValidationReport report = validate_coefficients(coeffs, scenario.bounds, grid, initial);
  if (!report.ok()) throw ValidationError("scenario '" + scenario.name + "' failed validation\n" + report.to_string());

  SolverOptions opts = options.solver ? *options.solver : solver_options(scenario);
  opts.threads = options.threads;

  std::optional<SourceHook> hook;
  if (scenario.manufactured) hook = manufactured_source(*scenario.manufactured, coeffs);

  Trajectory traj;
  traj.summary.reserve(static_cast<std::size_t>(grid.Nt) + 1);
  State state = initial_state(scenario, grid);
  check_finite(state, grid);
  const auto keep = [&](const State& s) {
    if (options.observer) options.observer(s);
    if (scenario.snapshots.includes(s.step, grid.Nt)) traj.snapshots.push_back(s);
  };
  keep(state);
  traj.summary.push_back(summarize(state, coeffs, grid, std::vector<double>(static_cast<std::size_t>(state.regions()), 0.0)));

  StepRecord record;
  for (int k = 0; k < grid.Nt; ++k) {
    state = step(state, coeffs, grid, opts, hook ? &*hook : nullptr, &record);
    check_finite(state, grid);
    keep(state);
    traj.summary.push_back(summarize(state, coeffs, grid, record.exiting));
  }
  traj.final_state = std::move(state);
  return traj;
}

}  // namespace fishpop
