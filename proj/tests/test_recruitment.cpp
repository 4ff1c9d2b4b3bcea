#include <doctest.h>

#include <random>

#include "fishpop/recruitment.hpp"
#include "support.hpp"

using namespace fishpop;
using namespace fishpop::test;

namespace {

struct Setup {
  DomainBounds bounds{1.0, 2.0, 1.0, 1};
  Grid grid;
  CoefficientSet coeffs{1};
  Setup(int Nt, int Nl) {
    grid = build_grid(bounds, Nt, Nl);
    auto& r = coeffs.region(0);
    r.growth = constant(0.0);
    r.dispersion = constant(0.01);
    r.weight = constant(1.0);
    r.recruitment_modulation = constant(1.0);
    r.theta = 1.0;
    coeffs.recruit_length = 0.2;
    coeffs.maturity_length = 0.45;
  }
};

State filled(const Grid& g, double (*f)(double, double)) {
  State s(1, g);
  for (int j = 0; j <= g.Na; ++j)
    for (int m = 0; m <= g.Nl; ++m) s(0, j, m) = f(g.age(j), g.length(m));
  return s;
}

}  // namespace

TEST_SUITE("recruitment") {
  TEST_CASE("spawning biomass of simple states") {
    Setup s(8, 10);  // L_m = 0.45 lies inside a length cell
    State c = filled(s.grid, [](double, double) { return 3.0; });
    const double P = spawning_biomass(c, s.coeffs, s.grid, 0.0).values[0];
    CHECK(P == doctest::Approx(3.0 * s.bounds.A * (s.bounds.L - 0.45)).epsilon(1e-14));

    State young = filled(s.grid, [](double, double l) { return l < 0.35 ? 1.0 : 0.0; });
    CHECK(spawning_biomass(young, s.coeffs, s.grid, 0.0).values[0] == 0.0);

    // Piecewise-linear integrands in l are integrated exactly from L_m on.
    State lin = filled(s.grid, [](double, double l) { return l; });
    CHECK(spawning_biomass(lin, s.coeffs, s.grid, 0.0).values[0] ==
          doctest::Approx(s.bounds.A * 0.5 * (1.0 - 0.45 * 0.45)).epsilon(1e-14));
  }

  TEST_CASE("spawning biomass is linear in the state") {
    Setup s(4, 12);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    State p(1, s.grid), q(1, s.grid), comb(1, s.grid);
    const double alpha = 2.75;
    for (std::size_t k = 0; k < p.values().size(); ++k) {
      p.values()[k] = u(rng);
      q.values()[k] = u(rng);
      comb.values()[k] = alpha * p.values()[k] + q.values()[k];
    }
    const double Pp = spawning_biomass(p, s.coeffs, s.grid, 0).values[0];
    const double Pq = spawning_biomass(q, s.coeffs, s.grid, 0).values[0];
    CHECK(spawning_biomass(comb, s.coeffs, s.grid, 0).values[0] == doctest::Approx(alpha * Pp + Pq).epsilon(1e-14));
    CHECK(Pp >= 0.0);
  }

  TEST_CASE("spawning biomass matches a refined reference quadrature") {
    // Random tabulated p and w, evaluated on the grid and on a 10x finer
    // lattice; the fine trapezoid rule is the reference.
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
      Setup coarse(32, 80);
      const auto p_field = random_field(rng, coarse.bounds, 0.0, 2.0);
      coarse.coeffs.region(0).weight = random_field(rng, coarse.bounds, 0.0, 2.0);
      const auto eval = [&](const Grid& g) {
        State s(1, g);
        for (int j = 0; j <= g.Na; ++j)
          for (int m = 0; m <= g.Nl; ++m) s(0, j, m) = p_field(0, g.age(j), g.length(m));
        return spawning_biomass(s, coarse.coeffs, g, 0.0).values[0];
      };
      const Grid fine = build_grid(coarse.bounds, 320, 800);
      const double ref = eval(fine);
      CHECK(eval(coarse.grid) == doctest::Approx(ref).epsilon(1e-3));
    }
  }

  TEST_CASE("Beverton-Holt values") {
    RecruitmentParams params;
    params.theta = 1.0;
    params.recruit_length = 0.2;
    const auto psi1 = constant(1.0);
    params.modulation = &psi1;
    CHECK(beverton_holt(0, 0.1, 0.0, params) == 0.0);
    CHECK(beverton_holt(0, 0.1, 1.0, params) == 0.5);
    CHECK(beverton_holt(0, 0.2, 1.0, params) == 0.5);
    CHECK(beverton_holt(0, 0.3, 1.0, params) == 0.0);
    CHECK(beverton_holt(0, 0.1, -5.0, params) == 0.0);
    const auto psi2 = constant(2.0);
    params.modulation = &psi2;
    const double big = beverton_holt(0, 0.0, 1e12, params);
    CHECK(big < 2.0);
    CHECK(big == doctest::Approx(2.0).epsilon(1e-11));
  }

  TEST_CASE("Beverton-Holt is monotone and bounded") {
    RecruitmentParams params;
    params.theta = 0.3;
    params.recruit_length = 0.5;
    const auto psi = expr("1 + sin(t)");
    params.modulation = &psi;
    for (double t : {0.0, 0.5, 1.0, 4.0}) {
      double prev = -1.0;
      for (double P = -1.0; P < 50.0; P += 0.37) {
        const double b = beverton_holt(t, 0.1, P, params);
        CHECK(b >= prev);
        CHECK(b >= 0.0);
        CHECK(b <= psi(t, 0, 0));
        prev = b;
      }
    }
  }

  TEST_CASE("boundary fill") {
    Setup s(4, 10);  // nodes at 0, 0.1, ..., faces at 0.05, 0.15, 0.25: L_b = 0.2 cuts the cell of node 2
    State st(1, s.grid);
    for (auto& v : st.values()) v = 7.0;
    fill_recruitment_boundary(st, s.coeffs, s.grid, 0.0, BiomassVector{{0.0}, 0.0});
    for (int m = 0; m <= s.grid.Nl; ++m) CHECK(st(0, 0, m) == 0.0);
    CHECK(st(0, 1, 3) == 7.0);  // other rows untouched

    fill_recruitment_boundary(st, s.coeffs, s.grid, 0.0, BiomassVector{{1.0}, 0.0});
    CHECK(st(0, 0, 0) == 0.5);
    CHECK(st(0, 0, 1) == 0.5);
    CHECK(st(0, 0, 2) == doctest::Approx(0.5 * 0.5));  // half of [0.15, 0.25] lies below L_b
    for (int m = 3; m <= s.grid.Nl; ++m) CHECK(st(0, 0, m) == 0.0);
    // The recruit row integrates to psi P/(theta+P) L_b.
    double mass = 0.0;
    for (int m = 0; m <= s.grid.Nl; ++m) mass += s.grid.length_weight(m) * st(0, 0, m);
    CHECK(mass == doctest::Approx(0.5 * 0.2));

    s.coeffs.region(0).recruitment_modulation = expr("2 + cos(t)");
    for (double P : {0.0, 0.1, 10.0, 1e9}) {
      fill_recruitment_boundary(st, s.coeffs, s.grid, 0.3, BiomassVector{{P}, 0.3});
      for (int m = 0; m <= s.grid.Nl; ++m) {
        CHECK(st(0, 0, m) >= 0.0);
        CHECK(st(0, 0, m) <= 3.0);
      }
    }
    CHECK(recruit_fraction(s.grid, 0, 0.2) == 1.0);
    CHECK(recruit_fraction(s.grid, 10, 0.2) == 0.0);
  }
}
