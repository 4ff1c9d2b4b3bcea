#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fishpop/field.hpp"
#include "fishpop/grid.hpp"
#include "fishpop/model.hpp"
#include "fishpop/scenario.hpp"
#include "fishpop/solver.hpp"

namespace fishpop::test {

inline CoefficientField expr(const char* text) { return CoefficientField::parse(text); }
inline CoefficientField constant(double c) { return CoefficientField::constant(c); }

/// Random table on a coarse lattice over the domain. ts/as/ls nodes per axis;
/// an axis with one node is constant along it.
inline LatticeTable random_table(std::mt19937_64& rng, const DomainBounds& b, int ts, int as, int ls, double lo,
                                 double hi) {
  LatticeTable tab;
  const auto axis = [](int n, double len) {
    std::vector<double> x;
    for (int k = 0; k < n; ++k) x.push_back(n == 1 ? 0.0 : len * k / (n - 1));
    return x;
  };
  tab.t = axis(ts, b.T);
  tab.a = axis(as, b.A);
  tab.l = axis(ls, b.L);
  std::uniform_real_distribution<double> u(lo, hi);
  tab.values.resize(tab.t.size() * tab.a.size() * tab.l.size());
  for (auto& v : tab.values) v = u(rng);
  return tab;
}

inline CoefficientField random_field(std::mt19937_64& rng, const DomainBounds& b, double lo, double hi) {
  return CoefficientField(random_table(rng, b, 3, 3, 5, lo, hi));
}

/// Single-region scenario with constant coefficients; callers override fields.
inline Scenario basic_scenario(int regions = 1, double T = 1.0, double A = 1.0, int Nt = 10, int Nl = 16) {
  Scenario s;
  s.name = "test";
  s.bounds = DomainBounds{T, A, 1.0, regions};
  s.Nt = Nt;
  s.Nl = Nl;
  s.coefficients = CoefficientSet(regions);
  s.coefficients.recruit_length = 0.2;
  s.coefficients.maturity_length = 0.5;
  for (int i = 0; i < regions; ++i) {
    auto& r = s.coefficients.region(i);
    r.growth = constant(0.0);
    r.dispersion = constant(0.01);
    r.natural_mortality = constant(0.0);
    r.fishing_mortality = constant(0.0);
    r.weight = constant(1.0);
    r.recruitment_modulation = constant(1.0);
    r.theta = 1.0;
    s.initial.push_back(constant(0.0));
  }
  s.snapshots = SnapshotSchedule{0, {}, false};
  return s;
}

/// Random scenario whose data pass validation: tabulated nonnegative rates,
/// growth of either sign, dispersion bounded away from zero.
inline Scenario random_scenario(std::mt19937_64& rng, int regions, int Nt, int Nl) {
  Scenario s = basic_scenario(regions, 2.0, 1.0, Nt, Nl);
  const DomainBounds& b = s.bounds;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  s.coefficients.recruit_length = 0.1 + 0.2 * u(rng);
  s.coefficients.maturity_length = 0.4 + 0.3 * u(rng);
  for (int i = 0; i < regions; ++i) {
    auto& r = s.coefficients.region(i);
    r.growth = random_field(rng, b, -0.5, 1.0);
    r.dispersion = random_field(rng, b, 1e-3, 0.05);
    r.natural_mortality = random_field(rng, b, 0.0, 1.0);
    r.fishing_mortality = random_field(rng, b, 0.0, 0.5);
    r.weight = random_field(rng, b, 0.0, 2.0);
    r.recruitment_modulation = CoefficientField(random_table(rng, b, 4, 1, 1, 0.0, 3.0));
    r.theta = 0.05 + 2.0 * u(rng);
    s.initial[i] = random_field(rng, b, 0.0, 5.0);
    for (int j = 0; j < regions; ++j)
      if (j != i && u(rng) < 0.7) s.coefficients.set_movement(i, j, random_field(rng, b, 0.0, 1.5));
  }
  s.boundary = u(rng) < 0.5 ? BoundaryMode::paper_neumann : BoundaryMode::zero_flux;
  s.coupling = u(rng) < 0.8 ? CouplingMode::lagged : CouplingMode::fixed_point;
  return s;
}

inline double max_abs_diff(std::span<const double> x, std::span<const double> y) {
  double e = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) e = std::max(e, std::abs(x[k] - y[k]));
  return e;
}

}  // namespace fishpop::test
