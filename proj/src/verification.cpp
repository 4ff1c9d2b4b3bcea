#include "fishpop/verification.hpp"

#include <cmath>
#include <limits>

#include "fishpop/errors.hpp"

namespace fishpop {

Scenario bump_mortality(const Scenario& scenario, int region, double factor) {
  if (region < 0 || region >= scenario.bounds.regions)
    throw ValidationError("mortality bump names region " + std::to_string(region + 1) + ", which does not exist");
  if (!(factor >= 1.0)) throw ValidationError("mortality bump factor must be at least 1");
  Scenario s = scenario;
  RegionCoefficients& r = s.coefficients.region(region);
  r.natural_mortality = r.natural_mortality.scaled(factor);
  r.fishing_mortality = r.fishing_mortality.scaled(factor);
  return s;
}

ComparisonReport compare_runs(const Scenario& base, const Scenario& bumped, int threads) {
  std::vector<State> reference;
  RunOptions opts;
  opts.threads = threads;
  opts.observer = [&](const State& s) { reference.push_back(s); };
  Scenario quiet = base;
  quiet.snapshots = SnapshotSchedule{0, {}, false};
  run(quiet, opts);

  ComparisonReport r;
  r.worst = -std::numeric_limits<double>::infinity();
  opts.observer = [&](const State& s) {
    const auto k = static_cast<std::size_t>(s.step);
    if (k >= reference.size() || !s.same_shape(reference[k]))
      throw ValidationError("compared scenarios do not share a grid");
    const State& ref = reference[k];
    for (int i = 0; i < s.regions(); ++i)
      for (int j = 0; j < s.age_nodes(); ++j)
        for (int m = 0; m < s.length_nodes(); ++m) {
          const double diff = s(i, j, m) - ref(i, j, m);
          r.max_abs_difference = std::max(r.max_abs_difference, std::abs(diff));
          if (diff > r.worst) {
            r.worst = diff;
            r.step = s.step;
            r.region = i;
            r.age = j;
            r.length = m;
          }
        }
    ++r.steps;
  };
  quiet = bumped;
  quiet.snapshots = SnapshotSchedule{0, {}, false};
  run(quiet, opts);
  return r;
}

std::vector<ConvergenceLevel> convergence_study(const Scenario& scenario, int levels, int threads) {
  if (!scenario.manufactured) throw ValidationError("convergence study needs a scenario with a manufactured solution");
  if (levels < 2) throw ValidationError("convergence study needs at least 2 levels");
  std::vector<ConvergenceLevel> out;
  for (int q = 0; q < levels; ++q) {
    Scenario s = scenario;
    s.Nt = scenario.Nt << q;
    s.Nl = scenario.Nl << q;
    s.snapshots = SnapshotSchedule{0, {}, false};
    RunOptions opts;
    opts.threads = threads;
    const Trajectory traj = run(s, opts);
    const Grid grid = build_grid(s.bounds, s.Nt, s.Nl);
    const State& p = traj.final_state;
    double err = 0.0;
    for (int i = 0; i < p.regions(); ++i)
      for (int j = 0; j <= grid.Na; ++j)
        for (int m = 0; m <= grid.Nl; ++m)
          err = std::max(err, std::abs(p(i, j, m) - (*s.manufactured)[i](p.time, grid.age(j), grid.length(m))));
    ConvergenceLevel level{s.Nt, s.Nl, grid.dt, grid.dl, err, std::numeric_limits<double>::quiet_NaN()};
    if (!out.empty()) level.order = std::log2(out.back().error / err);
    out.push_back(level);
  }
  return out;
}

}  // namespace fishpop
