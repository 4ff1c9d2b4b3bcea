// fishpop command-line driver.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fishpop/errors.hpp"
#include "fishpop/estimation.hpp"
#include "fishpop/io.hpp"
#include "fishpop/mc_oracle.hpp"
#include "fishpop/scenario.hpp"
#include "fishpop/verification.hpp"

namespace fs = std::filesystem;
using namespace fishpop;

namespace {

struct Common {
  std::string scenario;
  int threads = 0;
  std::string bc_mode;
  std::string coupling;
  std::uint64_t seed = 1;
};

int default_threads() {
  if (const char* env = std::getenv("FISHPOP_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
    throw ParseError(std::string("FISHPOP_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

void add_common(CLI::App* cmd, Common& c, bool seed = false) {
  cmd->add_option("scenario", c.scenario, "Scenario file (YAML)")->required();
  cmd->add_option("--threads", c.threads, "Worker threads (default: $FISHPOP_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--bc-mode", c.bc_mode, "Length boundary mode")
      ->check(CLI::IsMember({"paper-neumann", "zero-flux"}));
  cmd->add_option("--coupling", c.coupling, "Recruitment coupling")->check(CLI::IsMember({"lagged", "fixed-point"}));
  if (seed) cmd->add_option("--seed", c.seed, "Random seed");
}

Scenario load(const Common& c) {
  Scenario s = load_scenario(c.scenario);
  if (!c.bc_mode.empty()) s.boundary = parse_boundary_mode(c.bc_mode);
  if (!c.coupling.empty()) s.coupling = parse_coupling_mode(c.coupling);
  return s;
}

int threads_of(const Common& c) { return c.threads > 0 ? c.threads : default_threads(); }

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::vector<double> parse_values(const std::vector<std::string>& items, std::size_t n, double fallback) {
  const auto parts = split_list(items);
  if (parts.empty()) return std::vector<double>(n, fallback);
  if (parts.size() != n) throw ParseError("expected " + std::to_string(n) + " values, got " + std::to_string(parts.size()));
  std::vector<double> v;
  for (const auto& p : parts) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(p, &used));
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::exception&) {
      throw ParseError("'" + p + "' is not a number");
    }
  }
  return v;
}

FreeParameterSet parse_free(const std::vector<std::string>& items) {
  FreeParameterSet free;
  for (const auto& p : split_list(items)) free.push_back(parse_free_parameter(p));
  if (free.empty()) throw ParseError("--free needs at least one parameter");
  return free;
}

int cmd_validate(const Common& c) {
  const Scenario s = load(c);
  const Grid grid = build_grid(s.bounds, s.Nt, s.Nl);
  const ValidationReport report = validate_coefficients(
      s.coefficients, s.bounds, grid,
      s.manufactured ? std::span<const CoefficientField>{} : std::span<const CoefficientField>(s.initial));
  std::cout << report.to_string();
  return report.ok() ? 0 : ValidationError("").exit_code();
}

int cmd_run(const Common& c, const std::string& output_override) {
  const Scenario s = load(c);
  const int threads = threads_of(c);
  const Grid grid = build_grid(s.bounds, s.Nt, s.Nl);
  const fs::path dir = output_override.empty() ? fs::path(s.output) : fs::path(output_override);

  const auto start = std::chrono::steady_clock::now();
  RunOptions opts;
  opts.threads = threads;
  const Trajectory traj = run(s, opts);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  RunManifest manifest;
  for (const State& snap : traj.snapshots) {
    const std::string name = "snapshot_" + std::to_string(snap.step) + ".csv";
    write_snapshot(snap, grid, dir / name);
    manifest.files.push_back(name);
  }
  write_summary(traj, dir / "summary.csv");
  manifest.files.push_back("summary.csv");

  manifest.scenario_name = s.name;
  manifest.scenario_hash = fnv1a_hex(print_scenario(s));
  manifest.version = kVersion;
  manifest.regions = s.bounds.regions;
  manifest.Nt = grid.Nt;
  manifest.Na = grid.Na;
  manifest.Nl = grid.Nl;
  manifest.dt = grid.dt;
  manifest.dl = grid.dl;
  manifest.boundary = to_string(s.boundary);
  manifest.coupling = to_string(s.coupling);
  manifest.threads = threads;
  manifest.wall_clock_seconds = seconds;
  write_manifest(manifest, dir / "manifest.json");

  const SummaryRow& last = traj.summary.back();
  std::cout << "run " << s.name << ": " << grid.Nt << " steps, " << traj.snapshots.size() << " snapshots -> "
            << dir.string() << "\n";
  for (int i = 0; i < s.bounds.regions; ++i)
    std::cout << "  region " << i + 1 << " at t=" << format_double(last.t)
              << ": total=" << format_double(last.total[i]) << " biomass=" << format_double(last.biomass[i]) << "\n";
  return 0;
}

int cmd_compare(const Common& c, const std::string& bump, double tolerance) {
  const auto colon = bump.find(':');
  if (colon == std::string::npos) throw ParseError("--mortality-bump must be written region:factor");
  int region = 0;
  double factor = 0.0;
  try {
    region = std::stoi(bump.substr(0, colon));
    factor = std::stod(bump.substr(colon + 1));
  } catch (const std::exception&) {
    throw ParseError("--mortality-bump must be written region:factor, got '" + bump + "'");
  }
  const Scenario base = load(c);
  const Scenario bumped = bump_mortality(base, region - 1, factor);
  const ComparisonReport r = compare_runs(base, bumped, threads_of(c));
  std::cout << "compared " << r.steps << " states, mortality of region " << region << " x" << format_double(factor)
            << "\n";
  std::cout << "max |p_bumped - p_base| = " << format_double(r.max_abs_difference) << "\n";
  std::cout << "worst p_bumped - p_base = " << format_double(r.worst) << " at step " << r.step << ", region "
            << r.region + 1 << ", age node " << r.age << ", length node " << r.length << "\n";
  if (r.ok(tolerance)) {
    std::cout << "comparison property holds (tolerance " << format_double(tolerance) << ")\n";
    return 0;
  }
  std::cout << "comparison property VIOLATED\n";
  return 1;
}

int cmd_converge(const Common& c, int levels) {
  const Scenario s = load(c);
  const auto table = convergence_study(s, levels, threads_of(c));
  std::cout << "level,Nt,Nl,dt,dl,max_error,order\n";
  for (std::size_t q = 0; q < table.size(); ++q) {
    const auto& l = table[q];
    std::cout << q << ',' << l.Nt << ',' << l.Nl << ',' << format_double(l.dt) << ',' << format_double(l.dl) << ','
              << format_double(l.error) << ',' << (std::isnan(l.order) ? std::string("-") : format_double(l.order))
              << "\n";
  }
  return 0;
}

int cmd_oracle(const Common& c, std::size_t particles, int substeps, const std::string& output) {
  Scenario s = load(c);
  if (s.boundary != BoundaryMode::zero_flux) {
    std::cerr << "note: the particle oracle models zero-flux walls; running both models in zero-flux mode\n";
    s.boundary = BoundaryMode::zero_flux;
  }
  const int threads = threads_of(c);
  const Grid grid = build_grid(s.bounds, s.Nt, s.Nl);
  RunOptions opts;
  opts.threads = threads;
  const Trajectory traj = run(s, opts);

  McConfig mc;
  mc.particles = particles;
  mc.seed = c.seed;
  mc.substeps = substeps;
  mc.threads = threads;
  const int final_step[] = {grid.Nt};
  const auto hist = simulate_particles(s, mc, final_step);
  const DensityComparison cmp = compare_densities(traj.final_state, grid, hist.front());

  std::cout << "oracle " << s.name << ": " << particles << " particles, seed " << c.seed << ", t=" << format_double(hist.front().t)
            << "\n";
  std::cout << "L1 = " << format_double(cmp.l1) << ", relative L1 = " << format_double(cmp.l1_relative)
            << ", Linf = " << format_double(cmp.linf) << "\n";
  for (std::size_t i = 0; i < cmp.pde_totals.size(); ++i)
    std::cout << "  region " << i + 1 << ": pde total " << format_double(cmp.pde_totals[i]) << ", mc total "
              << format_double(cmp.mc_totals[i]) << " +- " << format_double(cmp.mc_standard_errors[i])
              << ", z = " << format_double(cmp.z_scores[i]) << "\n";
  if (!output.empty()) {
    write_histogram(hist.front(), grid, fs::path(output) / "histogram.csv");
    write_snapshot(traj.final_state, grid, fs::path(output) / "pde_final.csv");
  }
  return 0;
}

int cmd_synthesize(const Common& c, const std::vector<std::string>& free_names, const std::vector<std::string>& truth,
                   double noise, std::vector<int> steps, bool totals, const std::string& output) {
  const Scenario s = load(c);
  const FreeParameterSet free = parse_free(free_names);
  const auto values = parse_values(truth, free.size(), 1.0);
  ObservationPlan plan;
  if (steps.empty())
    for (int k = 0; k <= s.Nt; ++k) steps.push_back(k);
  plan.steps = std::move(steps);
  plan.totals = totals;
  const auto obs = synthesize_observations(s, free, values, plan, noise, c.seed, threads_of(c));
  write_observations(obs, output);
  std::cout << "wrote " << obs.size() << " observations to " << output << "\n";
  return 0;
}

int cmd_fit(const Common& c, const std::string& obs_path, const std::vector<std::string>& free_names,
            const std::vector<std::string>& init, int budget) {
  const Scenario s = load(c);
  const FreeParameterSet free = parse_free(free_names);
  const auto obs = read_observations(obs_path);
  auto x0 = parse_values(init, free.size(), 1.0);
  FitOptions opts;
  opts.budget = budget;
  opts.threads = threads_of(c);
  const FitResult r = fit(s, obs, free, x0, opts);
  std::cout << "evaluation,loss,best";
  for (const auto& p : free) std::cout << ',' << p.name;
  std::cout << "\n";
  for (std::size_t e = 0; e < r.trace.size(); ++e) {
    std::cout << e + 1 << ',' << format_double(r.trace[e].loss) << ',' << format_double(r.trace[e].best);
    for (double v : r.trace[e].values) std::cout << ',' << format_double(v);
    std::cout << "\n";
  }
  std::cout << "fitted:";
  for (std::size_t k = 0; k < free.size(); ++k) std::cout << ' ' << free[k].name << '=' << format_double(r.values[k]);
  std::cout << "\nloss: " << format_double(r.loss) << "\n";
  if (r.budget_exhausted) std::cout << "budget of " << budget << " evaluations exhausted before convergence\n";
  return 0;
}

int cmd_normalize(const Common& c) {
  std::cout << print_scenario(load(c));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-region age-size structured fish population simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  std::string output;
  std::string bump;
  double tolerance = 1e-12;
  int levels = 3;
  std::size_t particles = 100000;
  int substeps = 10;
  std::string obs;
  std::vector<std::string> free_names, values;
  int budget = 200;
  double noise = 0.0;
  std::vector<int> steps;
  bool totals = false;

  auto* validate = app.add_subcommand("validate", "Check the scenario against the model assumptions");
  add_common(validate, common);

  auto* run_cmd = app.add_subcommand("run", "Integrate the scenario; write snapshots, summary and manifest");
  add_common(run_cmd, common);
  run_cmd->add_option("-o,--output", output, "Output directory (default: the scenario's output key)");

  auto* compare = app.add_subcommand("compare", "Check that raising mortality lowers the density everywhere");
  add_common(compare, common);
  compare->add_option("--mortality-bump", bump, "region:factor with factor >= 1")->required();
  compare->add_option("--tolerance", tolerance, "Allowed excess of the bumped density");

  auto* converge = app.add_subcommand("converge", "Manufactured-solution refinement study");
  add_common(converge, common);
  converge->add_option("--levels", levels, "Number of refinement levels")->check(CLI::Range(2, 12));

  auto* oracle = app.add_subcommand("oracle", "Compare the PDE with the individual-based particle model");
  add_common(oracle, common, true);
  oracle->add_option("--particles", particles, "Initial particle count")->check(CLI::PositiveNumber);
  oracle->add_option("--substeps", substeps, "Particle substeps per time step")->check(CLI::PositiveNumber);
  oracle->add_option("-o,--output", output, "Directory for histogram.csv and pde_final.csv");

  auto* synth = app.add_subcommand("synthesize", "Generate twin-experiment observations");
  add_common(synth, common, true);
  synth->add_option("--free", free_names, "Free parameters, e.g. mortality:1")->required();
  synth->add_option("--truth", values, "True multipliers (default 1)");
  synth->add_option("--noise", noise, "Observation noise sd")->check(CLI::NonNegativeNumber);
  synth->add_option("--steps", steps, "Observed step indices (default: all)");
  synth->add_flag("--totals", totals, "Also observe total abundance");
  synth->add_option("-o,--output", output, "Observation file")->required();

  auto* fit_cmd = app.add_subcommand("fit", "Estimate multipliers from observations");
  add_common(fit_cmd, common);
  fit_cmd->add_option("--obs", obs, "Observation file")->required();
  fit_cmd->add_option("--free", free_names, "Free parameters, e.g. mortality:1@0.1:10")->required();
  fit_cmd->add_option("--init", values, "Initial multipliers (default 1)");
  fit_cmd->add_option("--budget", budget, "Loss evaluation budget")->check(CLI::PositiveNumber);

  auto* normalize = app.add_subcommand("normalize", "Print the scenario in normalized form");
  add_common(normalize, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ParseError("").exit_code();
  }

  try {
    if (*validate) return cmd_validate(common);
    if (*run_cmd) return cmd_run(common, output);
    if (*compare) return cmd_compare(common, bump, tolerance);
    if (*converge) return cmd_converge(common, levels);
    if (*oracle) return cmd_oracle(common, particles, substeps, output);
    if (*synth) return cmd_synthesize(common, free_names, values, noise, steps, totals, output);
    if (*fit_cmd) return cmd_fit(common, obs, free_names, values, budget);
    if (*normalize) return cmd_normalize(common);
  } catch (const Error& e) {
    std::cerr << "fishpop: " << e.category() << " error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "fishpop: internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
