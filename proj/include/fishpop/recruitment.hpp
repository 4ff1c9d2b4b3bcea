#pragma once

#include <vector>

#include "fishpop/grid.hpp"
#include "fishpop/model.hpp"

namespace fishpop {

/// Spawning biomass P_i(t) of every region.
struct BiomassVector {
  std::vector<double> values;
  double t = 0.0;
};

struct RecruitmentParams {
  double theta = 1.0;
  double recruit_length = 0.1;
  const CoefficientField* modulation = nullptr;
};

RecruitmentParams recruitment_params(const CoefficientSet& coeffs, int region);

/// Weighted abundance of mature fish, int_0^A int_{L_m}^L w p dl da, by the
/// trapezoid rule. The cell containing L_m contributes only its part above
/// L_m, integrating the linear interpolant of w p exactly.
BiomassVector spawning_biomass(const State& state, const CoefficientSet& coeffs, const Grid& grid, double t);

/// Beverton-Holt recruit density 1_[0,L_b](l) psi(t) P+/(theta + P+) with
/// P+ = max(P, 0).
double beverton_holt(double t, double l, double P, const RecruitmentParams& params);

/// Fraction of the control volume of length node m, [l_m - dl/2, l_m + dl/2]
/// clipped to [0, L], that lies inside [0, L_b].
double recruit_fraction(const Grid& grid, int m, double recruit_length);

/// Overwrites the a = 0 row of every region with the Beverton-Holt density
/// for `biomass`, using the fractional indicator of recruit_fraction().
void fill_recruitment_boundary(State& state, const CoefficientSet& coeffs, const Grid& grid, double t,
                               const BiomassVector& biomass);

}  // namespace fishpop
