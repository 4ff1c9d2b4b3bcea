#include "fishpop/estimation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "fishpop/errors.hpp"

namespace fishpop {

namespace {

struct TargetName {
  std::string_view name;
  ParameterTarget target;
};

constexpr TargetName kTargets[] = {{"mortality", ParameterTarget::mortality},
                                   {"natural_mortality", ParameterTarget::natural_mortality},
                                   {"fishing_mortality", ParameterTarget::fishing_mortality},
                                   {"growth", ParameterTarget::growth},
                                   {"dispersion", ParameterTarget::dispersion},
                                   {"migration", ParameterTarget::migration},
                                   {"theta", ParameterTarget::theta}};

double to_number(std::string_view s, std::string_view whole) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("free parameter '" + std::string(whole) + "': '" + std::string(s) + "' is not a number");
  return v;
}

}  // namespace

FreeParameter parse_free_parameter(std::string_view text) {
  FreeParameter p;
  p.name = std::string(text);
  std::string_view head = text;
  if (const auto at = text.find('@'); at != std::string_view::npos) {
    head = text.substr(0, at);
    const std::string_view bounds = text.substr(at + 1);
    const auto colon = bounds.find(':');
    if (colon == std::string_view::npos)
      throw ParseError("free parameter '" + std::string(text) + "': bounds must be written lo:hi");
    p.lo = to_number(bounds.substr(0, colon), text);
    p.hi = to_number(bounds.substr(colon + 1), text);
  }
  std::string_view target = head;
  if (const auto colon = head.find(':'); colon != std::string_view::npos) {
    target = head.substr(0, colon);
    const double r = to_number(head.substr(colon + 1), text);
    if (r < 1 || r != std::floor(r)) throw ParseError("free parameter '" + std::string(text) + "': bad region");
    p.region = static_cast<int>(r) - 1;
  }
  const auto it = std::find_if(std::begin(kTargets), std::end(kTargets), [&](const auto& t) { return t.name == target; });
  if (it == std::end(kTargets)) throw ParseError("unknown free parameter target '" + std::string(target) + "'");
  p.target = it->target;
  if (!(p.lo > 0.0) || !(p.hi > p.lo))
    throw ParseError("free parameter '" + std::string(text) + "': bounds must satisfy 0 < lo < hi");
  p.name = std::string(head);
  return p;
}

Scenario apply_parameters(const Scenario& scenario, const FreeParameterSet& free, std::span<const double> values) {
  if (values.size() != free.size()) throw ValidationError("parameter values do not match the free parameter set");
  Scenario s = scenario;
  CoefficientSet& c = s.coefficients;
  for (std::size_t k = 0; k < free.size(); ++k) {
    const FreeParameter& p = free[k];
    const double v = values[k];
    if (!(v >= p.lo && v <= p.hi))
      throw ValidationError("parameter " + p.name + " = " + format_double(v) + " is outside [" + format_double(p.lo) +
                            ", " + format_double(p.hi) + "]");
    if (p.region >= c.size()) throw ValidationError("parameter " + p.name + " names a region that does not exist");
    const int first = p.region < 0 ? 0 : p.region;
    const int last = p.region < 0 ? c.size() - 1 : p.region;
    for (int i = first; i <= last; ++i) {
      RegionCoefficients& r = c.region(i);
      switch (p.target) {
        case ParameterTarget::mortality:
          r.natural_mortality = r.natural_mortality.scaled(v);
          r.fishing_mortality = r.fishing_mortality.scaled(v);
          break;
        case ParameterTarget::natural_mortality:
          r.natural_mortality = r.natural_mortality.scaled(v);
          break;
        case ParameterTarget::fishing_mortality:
          r.fishing_mortality = r.fishing_mortality.scaled(v);
          break;
        case ParameterTarget::growth:
          r.growth = r.growth.scaled(v);
          break;
        case ParameterTarget::dispersion:
          r.dispersion = r.dispersion.scaled(v);
          break;
        case ParameterTarget::theta:
          r.theta *= v;
          break;
        case ParameterTarget::migration:
          for (int j = 0; j < c.size(); ++j)
            if (const CoefficientField* m = c.movement(i, j)) c.set_movement(i, j, m->scaled(v));
          break;
      }
    }
  }
  return s;
}

namespace {

double summary_value(const Trajectory& traj, const Observation& o) {
  if (o.step < 0 || o.step >= static_cast<int>(traj.summary.size()))
    throw ValidationError("observation step " + std::to_string(o.step) + " is outside the run");
  const SummaryRow& row = traj.summary[static_cast<std::size_t>(o.step)];
  const auto& series = o.kind == ObservationKind::biomass ? row.biomass : row.total;
  if (o.region < 0 || o.region >= static_cast<int>(series.size()))
    throw ValidationError("observation region " + std::to_string(o.region + 1) + " does not exist");
  return series[static_cast<std::size_t>(o.region)];
}

Trajectory quiet_run(const Scenario& s, int threads) {
  Scenario copy = s;
  copy.snapshots = SnapshotSchedule{0, {}, false};
  RunOptions opts;
  opts.threads = threads;
  return run(copy, opts);
}

}  // namespace

ObservationSeries synthesize_observations(const Scenario& scenario, const FreeParameterSet& free,
                                          std::span<const double> truth, const ObservationPlan& plan, double noise_sd,
                                          std::uint64_t seed, int threads) {
  if (noise_sd < 0.0) throw ValidationError("noise sd must be nonnegative");
  const Trajectory traj = quiet_run(apply_parameters(scenario, free, truth), threads);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  ObservationSeries out;
  for (int k : plan.steps) {
    for (int i = 0; i < scenario.bounds.regions; ++i) {
      for (const auto kind : {ObservationKind::biomass, ObservationKind::total}) {
        if ((kind == ObservationKind::biomass && !plan.biomass) || (kind == ObservationKind::total && !plan.totals))
          continue;
        Observation o;
        o.step = k;
        o.kind = kind;
        o.region = i;
        o.value = summary_value(traj, o);
        o.t = traj.summary.at(static_cast<std::size_t>(k)).t;
        if (noise_sd > 0.0) o.value += noise_sd * noise(gen);
        o.sd = noise_sd > 0.0 ? noise_sd : 1.0;
        out.push_back(o);
      }
    }
  }
  return out;
}

double loss(const Scenario& scenario, const FreeParameterSet& free, std::span<const double> values,
            const ObservationSeries& obs, int threads) {
  const Trajectory traj = quiet_run(apply_parameters(scenario, free, values), threads);
  double sum = 0.0;
  for (const auto& o : obs) {
    if (!(o.sd > 0.0)) throw ValidationError("observation sd must be positive");
    const double r = (summary_value(traj, o) - o.value) / o.sd;
    sum += r * r;
  }
  return sum;
}

FitResult fit(const Scenario& scenario, const ObservationSeries& obs, const FreeParameterSet& free,
              std::span<const double> init, const FitOptions& options) {
  const std::size_t n = free.size();
  if (n == 0) throw ValidationError("no free parameters to fit");
  if (init.size() != n) throw ValidationError("initial values do not match the free parameter set");
  if (options.budget < 1) throw ValidationError("fit budget must be at least one evaluation");
  for (std::size_t k = 0; k < n; ++k)
    if (!(init[k] >= free[k].lo && init[k] <= free[k].hi))
      throw ValidationError("initial value of " + free[k].name + " is outside its bounds");

  std::vector<double> log_lo(n), log_hi(n);
  for (std::size_t k = 0; k < n; ++k) {
    log_lo[k] = std::log(free[k].lo);
    log_hi[k] = std::log(free[k].hi);
  }
  const auto project = [&](std::vector<double> x) {
    for (std::size_t k = 0; k < n; ++k) x[k] = std::clamp(x[k], log_lo[k], log_hi[k]);
    return x;
  };

  FitResult result;
  result.loss = std::numeric_limits<double>::infinity();
  const auto evaluate = [&](const std::vector<double>& x) {
    std::vector<double> values(n);
    for (std::size_t k = 0; k < n; ++k) values[k] = std::clamp(std::exp(x[k]), free[k].lo, free[k].hi);
    double f = std::numeric_limits<double>::infinity();
    try {
      f = loss(scenario, free, values, obs, options.threads);
    } catch (const Error&) {
    }
    if (!std::isfinite(f)) f = std::numeric_limits<double>::infinity();
    if (f < result.loss) {
      result.loss = f;
      result.values = values;
    }
    result.trace.push_back({values, f, result.loss});
    return f;
  };
  const auto exhausted = [&] { return static_cast<int>(result.trace.size()) >= options.budget; };

  std::vector<double> x0(n);
  for (std::size_t k = 0; k < n; ++k) x0[k] = std::log(init[k]);
  std::vector<std::vector<double>> simplex{x0};
  std::vector<double> f{evaluate(x0)};
  for (std::size_t k = 0; k < n && !exhausted(); ++k) {
    std::vector<double> x = x0;
    x[k] += (x0[k] + options.initial_step <= log_hi[k]) ? options.initial_step : -options.initial_step;
    x = project(x);
    simplex.push_back(x);
    f.push_back(evaluate(x));
  }

  bool converged = false;
  while (simplex.size() == n + 1 && !exhausted()) {
    std::vector<std::size_t> order(n + 1);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) { return f[p] < f[q]; });
    {
      std::vector<std::vector<double>> s2;
      std::vector<double> f2;
      for (auto o : order) {
        s2.push_back(simplex[o]);
        f2.push_back(f[o]);
      }
      simplex = std::move(s2);
      f = std::move(f2);
    }
    double diameter = 0.0;
    for (std::size_t v = 1; v <= n; ++v)
      for (std::size_t k = 0; k < n; ++k) diameter = std::max(diameter, std::abs(simplex[v][k] - simplex[0][k]));
    const double spread = f[n] - f[0];
    if (diameter <= options.x_tolerance || (std::isfinite(spread) && spread <= options.f_tolerance)) {
      converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[v][k] / static_cast<double>(n);
    const auto along = [&](double coef) {
      std::vector<double> x(n);
      for (std::size_t k = 0; k < n; ++k) x[k] = centroid[k] + coef * (simplex[n][k] - centroid[k]);
      return project(x);
    };

    const std::vector<double> xr = along(-1.0);
    const double fr = evaluate(xr);
    if (fr < f[0]) {
      if (exhausted()) {
        simplex[n] = xr;
        f[n] = fr;
        break;
      }
      const std::vector<double> xe = along(-2.0);
      const double fe = evaluate(xe);
      if (fe < fr) {
        simplex[n] = xe;
        f[n] = fe;
      } else {
        simplex[n] = xr;
        f[n] = fr;
      }
      continue;
    }
    if (fr < f[n - 1]) {
      simplex[n] = xr;
      f[n] = fr;
      continue;
    }
    if (exhausted()) break;
    const bool outside = fr < f[n];
    const std::vector<double> xc = along(outside ? -0.5 : 0.5);
    const double fc = evaluate(xc);
    if (fc < (outside ? fr : f[n])) {
      simplex[n] = xc;
      f[n] = fc;
      continue;
    }
    for (std::size_t v = 1; v <= n && !exhausted(); ++v) {
      for (std::size_t k = 0; k < n; ++k) simplex[v][k] = simplex[0][k] + 0.5 * (simplex[v][k] - simplex[0][k]);
      simplex[v] = project(simplex[v]);
      f[v] = evaluate(simplex[v]);
    }
  }
  result.budget_exhausted = !converged && exhausted();
  return result;
}

}  // namespace fishpop
