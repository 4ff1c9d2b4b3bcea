#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fishpop/scenario.hpp"

namespace fishpop {

enum class ParameterTarget { mortality, natural_mortality, fishing_mortality, growth, dispersion, migration, theta };

/// Scalar multiplier on one family of coefficients. `region` is 0-based;
/// -1 applies the multiplier to every region (for migration: every rate
/// leaving the region).
struct FreeParameter {
  std::string name;
  ParameterTarget target = ParameterTarget::mortality;
  int region = -1;
  double lo = 0.1;
  double hi = 10.0;
};

using FreeParameterSet = std::vector<FreeParameter>;

/// Parses "target[:region][@lo:hi]", e.g. "mortality:1", "growth@0.5:2".
/// Regions are 1-based. Throws ParseError on unknown targets or bad bounds.
FreeParameter parse_free_parameter(std::string_view text);

/// Copy of the scenario with each multiplier applied. Throws ValidationError
/// if a value lies outside its bounds or a region index is out of range.
Scenario apply_parameters(const Scenario& scenario, const FreeParameterSet& free, std::span<const double> values);

enum class ObservationKind { biomass, total };

struct Observation {
  int step = 0;
  double t = 0.0;
  ObservationKind kind = ObservationKind::biomass;
  int region = 0;  // 0-based
  double value = 0.0;
  double sd = 1.0;
};

using ObservationSeries = std::vector<Observation>;

struct ObservationPlan {
  std::vector<int> steps;
  bool biomass = true;
  bool totals = false;
};

/// Runs the scenario at `truth` and samples the planned summaries, adding
/// independent N(0, noise_sd^2) noise from a seeded generator. Each
/// observation records sd = noise_sd, or 1 when noise_sd is 0 so that
/// noiseless data still weigh every residual equally.
ObservationSeries synthesize_observations(const Scenario& scenario, const FreeParameterSet& free,
                                          std::span<const double> truth, const ObservationPlan& plan, double noise_sd,
                                          std::uint64_t seed, int threads = 1);

/// Sum of squared residuals, each divided by its sd^2.
double loss(const Scenario& scenario, const FreeParameterSet& free, std::span<const double> values,
            const ObservationSeries& obs, int threads = 1);

struct FitOptions {
  int budget = 200;            // loss evaluations
  double initial_step = 0.1;   // simplex edge in log-parameter space
  double x_tolerance = 1e-10;  // simplex diameter in log space
  double f_tolerance = 1e-14;  // spread of vertex losses
  int threads = 1;
};

struct FitEvaluation {
  std::vector<double> values;
  double loss = 0.0;
  double best = 0.0;  // best loss so far, nonincreasing along the trace
};

struct FitResult {
  std::vector<double> values;
  double loss = 0.0;
  std::vector<FitEvaluation> trace;
  bool budget_exhausted = false;
};

/// Nelder-Mead simplex minimisation of loss() over log(values), with each
/// vertex projected onto [log lo, log hi]. Loss evaluations that throw count
/// as +inf. Deterministic for fixed inputs.
FitResult fit(const Scenario& scenario, const ObservationSeries& obs, const FreeParameterSet& free,
              std::span<const double> init, const FitOptions& options = {});

}  // namespace fishpop
