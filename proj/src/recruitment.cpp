#include "fishpop/recruitment.hpp"

#include <algorithm>
#include <cmath>

#include "fishpop/errors.hpp"

namespace fishpop {

RecruitmentParams recruitment_params(const CoefficientSet& coeffs, int region) {
  const auto& r = coeffs.region(region);
  return {r.theta, coeffs.recruit_length, &r.recruitment_modulation};
}

BiomassVector spawning_biomass(const State& state, const CoefficientSet& coeffs, const Grid& grid, double t) {
  state.check_shape(grid);
  if (state.regions() != coeffs.size()) throw ValidationError("state and coefficients disagree on the region count");

  const double Lm = coeffs.maturity_length;
  // First length node at or above L_m, and the partial cell below it.
  int first = static_cast<int>(std::ceil(Lm / grid.dl));
  if (first > 0 && grid.length(first - 1) >= Lm) --first;
  first = std::clamp(first, 0, grid.Nl);
  const double lf = grid.length(first);
  const double partial = first > 0 ? lf - Lm : 0.0;  // width of [L_m, l_first]
  const double frac = first > 0 ? (Lm - grid.length(first - 1)) / grid.dl : 0.0;

  std::vector<double> wp(static_cast<std::size_t>(grid.length_nodes()));
  BiomassVector out;
  out.t = t;
  out.values.assign(static_cast<std::size_t>(state.regions()), 0.0);
  for (int i = 0; i < state.regions(); ++i) {
    const auto& w = coeffs.region(i).weight;
    double total = 0.0;
    for (int j = 0; j <= grid.Na; ++j) {
      const double a = grid.age(j);
      const auto p = state.profile(i, j);
      const int lo = std::max(first - 1, 0);
      for (int m = lo; m <= grid.Nl; ++m) wp[m] = w(t, a, grid.length(m)) * p[m];
      double row = 0.0;
      for (int m = first; m < grid.Nl; ++m) row += 0.5 * grid.dl * (wp[m] + wp[m + 1]);
      if (partial > 0.0) {
        const double at_lm = wp[first - 1] + frac * (wp[first] - wp[first - 1]);
        row += 0.5 * partial * (at_lm + wp[first]);
      }
      total += grid.age_weight(j) * row;
    }
    out.values[i] = total;
  }
  return out;
}

double beverton_holt(double t, double l, double P, const RecruitmentParams& params) {
  if (l < 0.0 || l > params.recruit_length) return 0.0;
  const double p = std::max(P, 0.0);
  const double psi = params.modulation ? (*params.modulation)(t, 0.0, 0.0) : 1.0;
  return psi * p / (params.theta + p);
}

double recruit_fraction(const Grid& grid, int m, double recruit_length) {
  const double lo = std::max(grid.length(m) - 0.5 * grid.dl, 0.0);
  const double hi = std::min(grid.length(m) + 0.5 * grid.dl, grid.L);
  const double inside = std::clamp(recruit_length, lo, hi) - lo;
  return inside / (hi - lo);
}

void fill_recruitment_boundary(State& state, const CoefficientSet& coeffs, const Grid& grid, double t,
                               const BiomassVector& biomass) {
  state.check_shape(grid);
  if (biomass.values.size() != static_cast<std::size_t>(state.regions()))
    throw ValidationError("biomass vector does not match the region count");
  for (int i = 0; i < state.regions(); ++i) {
    const RecruitmentParams params = recruitment_params(coeffs, i);
    const double full = beverton_holt(t, 0.0, biomass.values[i], params);
    auto row = state.profile(i, 0);
    for (int m = 0; m <= grid.Nl; ++m) row[m] = full * recruit_fraction(grid, m, params.recruit_length);
  }
}

}  // namespace fishpop
