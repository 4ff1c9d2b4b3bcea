#include "fishpop/mc_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>

#include "fishpop/errors.hpp"
#include "fishpop/recruitment.hpp"

namespace fishpop {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream: a SplitMix64 generator started from a hash of the key.
class Stream {
 public:
  using result_type = std::uint64_t;
  Stream(std::uint64_t seed, std::uint64_t id, std::uint64_t step, std::uint64_t substep)
      : state_(mix(mix(mix(seed) ^ id) ^ step) ^ (substep * 0xd1b54a32d192ed03ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double normal() { return std::normal_distribution<double>()(*this); }

 private:
  std::uint64_t state_;
};

constexpr std::uint64_t kInitStep = ~0ULL;
constexpr std::uint64_t kBirthTag = 1ULL << 63;

double reflect(double l, double L) {
  while (l < 0.0 || l > L) {
    if (l < 0.0) l = -l;
    if (l > L) l = 2.0 * L - l;
  }
  return l;
}

int bin(double x, double h, int n) {
  const int k = static_cast<int>(std::floor(x / h + 0.5));
  return std::clamp(k, 0, n);
}

DensityHistogram histogram(const std::vector<Particle>& particles, const Grid& grid, int regions, int step,
                           double weight) {
  DensityHistogram h;
  h.step = step;
  h.t = grid.time(step);
  h.regions = regions;
  h.age_nodes = grid.age_nodes();
  h.length_nodes = grid.length_nodes();
  h.weight = weight;
  const std::size_t cells = static_cast<std::size_t>(regions) * h.age_nodes * h.length_nodes;
  h.counts.assign(cells, 0);
  for (const auto& p : particles)
    if (p.alive) ++h.counts[h.index(p.region, bin(p.age, grid.dt, grid.Na), bin(p.length, grid.dl, grid.Nl))];
  h.density.assign(cells, 0.0);
  h.standard_error.assign(cells, 0.0);
  for (int i = 0; i < regions; ++i)
    for (int j = 0; j <= grid.Na; ++j)
      for (int m = 0; m <= grid.Nl; ++m) {
        const std::size_t c = h.index(i, j, m);
        const double volume = grid.age_weight(j) * grid.length_weight(m);
        const double n = static_cast<double>(h.counts[c]);
        h.density[c] = n * weight / volume;
        h.standard_error[c] = std::sqrt(n) * weight / volume;
      }
  return h;
}

}  // namespace

std::size_t DensityHistogram::alive() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

std::vector<DensityHistogram> simulate_particles(const Scenario& scenario, const McConfig& config,
                                                 std::span<const int> snapshot_steps) {
  if (config.particles < 1) throw ValidationError("particle count must be at least 1");
  if (config.substeps < 1) throw ValidationError("substep count must be at least 1");
  if (scenario.boundary != BoundaryMode::zero_flux)
    throw ValidationError("the particle oracle reflects at the walls and needs the zero-flux boundary mode");
  if (scenario.manufactured) throw ValidationError("the particle oracle does not support manufactured sources");

  const Grid grid = build_grid(scenario.bounds, scenario.Nt, scenario.Nl);
  const CoefficientSet& coeffs = scenario.coefficients;
  const ValidationReport report = validate_coefficients(coeffs, scenario.bounds, grid, scenario.initial);
  if (!report.ok()) throw ValidationError("scenario '" + scenario.name + "' failed validation\n" + report.to_string());

  const int N = scenario.bounds.regions;
  const double h = grid.dt / config.substeps;
  const double Lb = coeffs.recruit_length;
  const double Lm = coeffs.maturity_length;

  // Initial particles: systematic sampling of the initial nodal masses,
  // uniform within each node's control volume.
  const State p0 = initial_state(scenario, grid);
  std::vector<double> mass;
  double total = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= grid.Na; ++j)
      for (int m = 0; m <= grid.Nl; ++m) {
        const double v = p0(i, j, m) * grid.age_weight(j) * grid.length_weight(m);
        mass.push_back(v);
        total += v;
      }
  double weight = config.weight_per_particle;
  if (!(weight > 0.0)) weight = total > 0.0 ? total / static_cast<double>(config.particles) : 1.0;

  std::vector<Particle> particles;
  std::uint64_t next_id = 0;
  if (total > 0.0) {
    Stream root(config.seed, kInitStep, kInitStep, 0);
    double target = root.uniform() * weight;
    double cumulative = 0.0;
    std::size_t c = 0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j <= grid.Na; ++j)
        for (int m = 0; m <= grid.Nl; ++m, ++c) {
          cumulative += mass[c];
          const double a_lo = std::max(grid.age(j) - 0.5 * grid.dt, 0.0);
          const double a_hi = std::min(grid.age(j) + 0.5 * grid.dt, grid.A);
          const double l_lo = std::max(grid.length(m) - 0.5 * grid.dl, 0.0);
          const double l_hi = std::min(grid.length(m) + 0.5 * grid.dl, grid.L);
          while (target < cumulative) {
            Stream s(config.seed, next_id, kInitStep, 1);
            particles.push_back({i, a_lo + s.uniform() * (a_hi - a_lo), l_lo + s.uniform() * (l_hi - l_lo), true,
                                 next_id++});
            target += weight;
          }
        }
  }

  std::vector<DensityHistogram> out;
  const auto wanted = [&](int k) {
    return std::find(snapshot_steps.begin(), snapshot_steps.end(), k) != snapshot_steps.end();
  };
  const int threads = config.threads > 0 ? config.threads : 1;

  for (int k = 0;; ++k) {
    if (wanted(k)) out.push_back(histogram(particles, grid, N, k, weight));
    if (k == grid.Nt) break;
    const double tk = grid.time(k);

    // Lagged biomass from the particles alive at t_k.
    std::vector<double> biomass(static_cast<std::size_t>(N), 0.0);
    for (const auto& p : particles)
      if (p.alive && p.length >= Lm) biomass[p.region] += weight * coeffs.region(p.region).weight(tk, p.age, p.length);

    for (int s = 0; s < config.substeps; ++s) {
      const double ts = tk + s * h;
      std::atomic<bool> rate_too_large{false};
      const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(particles.size());
#pragma omp parallel for schedule(static) num_threads(threads)
      for (std::ptrdiff_t q = 0; q < n; ++q) {
        Particle& p = particles[q];
        if (!p.alive) continue;
        Stream rng(config.seed, p.id, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(s));
        const auto& rc = coeffs.region(p.region);
        const double g = rc.growth(ts, p.age, p.length);
        const double d = std::max(rc.dispersion(ts, p.age, p.length), 0.0);
        const double z = rc.total_mortality(ts, p.age, p.length);
        const double xi = rng.normal();
        const double survive = rng.uniform();
        const double jump = rng.uniform();
        const double l_old = p.length;
        p.length = reflect(p.length + g * h + xi * std::sqrt(2.0 * d * h), grid.L);
        if (survive >= std::exp(-z * h)) {
          p.alive = false;
          continue;
        }
        if (N > 1) {
          double cumulative = 0.0;
          int dest = p.region;
          for (int j = 0; j < N; ++j) {
            const CoefficientField* rate = coeffs.movement(p.region, j);
            if (!rate) continue;
            const double pj = (*rate)(ts, p.age, l_old) * h;
            if (dest == p.region && jump < cumulative + pj) dest = j;
            cumulative += pj;
          }
          if (cumulative > 1.0) rate_too_large = true;
          p.region = dest;
        }
        p.age += h;
        if (p.age > grid.A) p.alive = false;
      }
      if (rate_too_large)
        throw ValidationError("movement probability per substep exceeds 1; increase the substep count");

      for (int i = 0; i < N; ++i) {
        const double rate = beverton_holt(ts + 0.5 * h, 0.0, biomass[i], recruitment_params(coeffs, i)) * Lb;
        if (!(rate > 0.0)) continue;
        Stream births(config.seed, kBirthTag | static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k),
                      static_cast<std::uint64_t>(s));
        const auto count = std::poisson_distribution<long long>(rate * h / weight)(births);
        for (long long b = 0; b < count; ++b)
          particles.push_back({i, births.uniform() * h, births.uniform() * Lb, true, next_id++});
      }
    }
    std::erase_if(particles, [](const Particle& p) { return !p.alive; });
  }
  return out;
}

DensityComparison compare_densities(const State& pde, const Grid& grid, const DensityHistogram& mc) {
  pde.check_shape(grid);
  if (pde.regions() != mc.regions || pde.age_nodes() != mc.age_nodes || pde.length_nodes() != mc.length_nodes)
    throw ValidationError("PDE state and histogram have different shapes");
  if (pde.step != mc.step || std::abs(pde.time - mc.t) > 1e-12 * std::max(1.0, grid.T))
    throw ValidationError("PDE state (step " + std::to_string(pde.step) + ") and histogram (step " +
                          std::to_string(mc.step) + ") are at different times");
  DensityComparison r;
  const auto N = static_cast<std::size_t>(pde.regions());
  r.pde_totals.assign(N, 0.0);
  r.mc_totals.assign(N, 0.0);
  r.mc_standard_errors.assign(N, 0.0);
  r.z_scores.assign(N, 0.0);
  double pde_sum = 0.0;
  for (int i = 0; i < pde.regions(); ++i) {
    std::size_t count = 0;
    for (int j = 0; j <= grid.Na; ++j)
      for (int m = 0; m <= grid.Nl; ++m) {
        const std::size_t c = mc.index(i, j, m);
        const double volume = grid.age_weight(j) * grid.length_weight(m);
        const double diff = mc.density[c] - pde(i, j, m);
        r.l1 += std::abs(diff) * volume;
        r.linf = std::max(r.linf, std::abs(diff));
        r.pde_totals[i] += pde(i, j, m) * volume;
        r.mc_totals[i] += mc.density[c] * volume;
        count += mc.counts[c];
      }
    pde_sum += r.pde_totals[i];
    r.mc_standard_errors[i] = std::sqrt(static_cast<double>(count)) * mc.weight;
    const double gap = r.mc_totals[i] - r.pde_totals[i];
    if (r.mc_standard_errors[i] > 0.0)
      r.z_scores[i] = gap / r.mc_standard_errors[i];
    else
      r.z_scores[i] = gap == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), gap);
  }
  r.l1_relative = pde_sum > 0.0 ? r.l1 / pde_sum : (r.l1 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return r;
}

}  // namespace fishpop
