#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fishpop/grid.hpp"
#include "fishpop/scenario.hpp"

namespace fishpop {

/// One simulated fish (or super-individual carrying `weight` abundance).
struct Particle {
  int region = 0;
  double age = 0.0;
  double length = 0.0;
  bool alive = true;
  std::uint64_t id = 0;
};

struct McConfig {
  std::size_t particles = 10000;
  std::uint64_t seed = 1;
  int substeps = 10;
  /// Abundance per particle; 0 derives it from the initial abundance.
  double weight_per_particle = 0.0;
  int threads = 1;
};

/// Particle counts binned on the control volumes of the PDE nodes, with
/// density = count * weight / volume.
struct DensityHistogram {
  int step = 0;
  double t = 0.0;
  int regions = 0;
  int age_nodes = 0;
  int length_nodes = 0;
  double weight = 0.0;
  std::vector<std::size_t> counts;
  std::vector<double> density;
  std::vector<double> standard_error;

  std::size_t index(int i, int j, int m) const {
    return (static_cast<std::size_t>(i) * age_nodes + j) * length_nodes + m;
  }
  std::size_t alive() const;
};

/// Individual-based simulation of the scenario. Per substep h = dt/substeps
/// each particle moves l += gamma h + xi sqrt(2 d h) (reflected at 0 and L),
/// survives with probability exp(-z h), jumps to region j with probability
/// m_{i->j} h and ages by h; particles older than A retire. Recruits enter at
/// a = 0 with lengths uniform on [0, L_b] at the Beverton-Holt rate of the
/// biomass estimated from the particles at the start of each step.
/// Random streams are keyed by (seed, particle, step, substep), so results do
/// not depend on the thread count.
///
/// Requires zero-flux boundaries (reflection is the zero-flux condition).
/// Throws ValidationError for other modes, a zero particle count, or when
/// the total movement probability of a substep exceeds 1.
std::vector<DensityHistogram> simulate_particles(const Scenario& scenario, const McConfig& config,
                                                 std::span<const int> snapshot_steps);

struct DensityComparison {
  double l1 = 0.0;           // sum over cells of |mc - pde| * volume
  double l1_relative = 0.0;  // l1 / sum of pde cell abundances
  double linf = 0.0;         // max |mc - pde| density
  std::vector<double> pde_totals;
  std::vector<double> mc_totals;
  std::vector<double> mc_standard_errors;
  std::vector<double> z_scores;
};

/// Throws ValidationError when shapes or time stamps differ.
DensityComparison compare_densities(const State& pde, const Grid& grid, const DensityHistogram& mc);

}  // namespace fishpop
