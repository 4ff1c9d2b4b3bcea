#include <doctest.h>

#include <cmath>
#include <random>

#include "fishpop/errors.hpp"
#include "fishpop/field.hpp"
#include "fishpop/grid.hpp"
#include "fishpop/model.hpp"
#include "support.hpp"

using namespace fishpop;
using namespace fishpop::test;

namespace {

bool has_violation(const ValidationReport& r, const std::string& needle) {
  for (const auto& v : r.violations)
    if (v.assumption.find(needle) != std::string::npos) return true;
  return false;
}

CoefficientSet trivial_set(int N) {
  CoefficientSet c(N);
  for (int i = 0; i < N; ++i) {
    auto& r = c.region(i);
    r.growth = constant(0.0);
    r.dispersion = constant(0.1);
    r.natural_mortality = constant(0.0);
    r.fishing_mortality = constant(0.0);
    r.weight = constant(0.0);
    r.recruitment_modulation = constant(0.0);
    r.theta = 1.0;
  }
  c.recruit_length = 0.1;
  c.maturity_length = 0.5;
  return c;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("grid construction") {
    const Grid g = build_grid(DomainBounds{10, 5, 1, 1}, 20, 8);
    CHECK(g.dt == 0.5);
    CHECK(g.Na == 10);
    CHECK(g.da() == g.dt);
    const Grid one = build_grid(DomainBounds{1, 1, 1, 1}, 1, 3);
    CHECK(one.dt == 1.0);
    CHECK(one.Na == 1);
    CHECK_THROWS_AS(build_grid(DomainBounds{10, 3, 1, 1}, 7, 8), ValidationError);
    CHECK_THROWS_AS(build_grid(DomainBounds{1, 1, 1, 1}, 0, 8), ValidationError);
    CHECK_THROWS_AS(build_grid(DomainBounds{1, 1, 1, 1}, 4, 2), ValidationError);
    CHECK_THROWS_AS(check_bounds(DomainBounds{1, -1, 1, 1}), ValidationError);
    CHECK_THROWS_AS(check_bounds(DomainBounds{1, 1, 1, 0}), ValidationError);
    // Node coordinates hit the end points exactly.
    const Grid g3 = build_grid(DomainBounds{0.3, 0.3, 0.7, 1}, 3, 7);
    CHECK(g3.age(g3.Na) == 0.3);
    CHECK(g3.length(g3.Nl) == 0.7);
    CHECK(g3.time(g3.Nt) == 0.3);
  }

  TEST_CASE("field evaluation") {
    const DomainBounds b{2, 2, 3, 1};
    CHECK(evaluate_field(constant(4.5), b, 1, 1, 1) == 4.5);
    CHECK(evaluate_field(expr("a*l"), b, 0, 2, 3) == 6.0);
    LatticeTable tab;
    tab.t = {0};
    tab.a = {0};
    tab.l = {0, 3};
    tab.values = {0, 1};
    const CoefficientField lin(tab);
    CHECK(evaluate_field(lin, b, 0.5, 1.0, 1.5) == 0.5);
    CHECK(evaluate_field(lin, b, 0, 0, 3) == 1.0);
    CHECK_THROWS_AS(evaluate_field(lin, b, 0, 0, 3.5), ValidationError);
    CHECK_THROWS_AS(evaluate_field(lin, b, -0.1, 0, 1), ValidationError);
    CHECK(lin.scaled(2.0)(0, 0, 1.5) == 1.0);
  }

  TEST_CASE("multilinear interpolation and hull clamping") {
    LatticeTable tab;
    tab.t = {0, 1};
    tab.a = {0, 2};
    tab.l = {0, 1, 2};
    // value = t + a + l on the lattice: reproduced exactly inside.
    for (double t : tab.t)
      for (double a : tab.a)
        for (double l : tab.l) tab.values.push_back(t + a + l);
    const CoefficientField f(tab);
    CHECK(f(0.25, 0.5, 1.5) == doctest::Approx(2.25));
    CHECK(f(5.0, 0.5, 1.5) == doctest::Approx(3.0));  // clamped in t
    LatticeTable bad = tab;
    bad.values.pop_back();
    CHECK_THROWS_AS(CoefficientField{bad}, ParseError);
    LatticeTable unsorted = tab;
    unsorted.l = {0, 2, 1};
    CHECK_THROWS_AS(CoefficientField{unsorted}, ParseError);
  }

  TEST_CASE("movement matrix") {
    CoefficientSet one = trivial_set(1);
    const MovementMatrix M1 = movement_matrix_at(one, 0, 0, 0);
    CHECK(M1.size() == 1);
    CHECK(M1(0, 0) == 0.0);

    CoefficientSet two = trivial_set(2);
    two.set_movement(0, 1, constant(0.3));
    two.set_movement(1, 0, constant(0.3));
    const MovementMatrix M2 = movement_matrix_at(two, 0, 0, 0);
    CHECK(M2(0, 0) == -0.3);
    CHECK(M2(0, 1) == 0.3);
    CHECK(M2(1, 0) == 0.3);
    CHECK(M2(1, 1) == -0.3);

    CHECK_THROWS_AS(two.set_movement(0, 0, constant(1.0)), ValidationError);
    CHECK_THROWS_AS(two.set_movement(0, 2, constant(1.0)), ValidationError);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
      const int N = 1 + trial % 8;
      CoefficientSet c = trivial_set(N);
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          if (i != j) c.set_movement(i, j, constant(u(rng)));
      const MovementMatrix M = movement_matrix_at(c, 0, 0, 0);
      for (int j = 0; j < N; ++j) {
        double col = 0.0, scale = 0.0;
        for (int i = 0; i < N; ++i) {
          col += M(i, j);
          scale += std::abs(M(i, j));
          if (i != j) CHECK(M(i, j) >= 0.0);
        }
        CHECK(std::abs(col) <= 1e-15 * scale);
      }
    }
  }

  TEST_CASE("validation of the model assumptions") {
    const DomainBounds b{1, 1, 1, 2};
    const Grid g = build_grid(b, 4, 8);
    CoefficientSet c = trivial_set(2);
    ValidationReport ok = validate_coefficients(c, b, g);
    CHECK(ok.ok());
    CHECK(ok.inferred_d0 == 0.1);

    CoefficientSet d0 = c;
    d0.region(0).dispersion = constant(0.0);
    const auto r1 = validate_coefficients(d0, b, g);
    CHECK_FALSE(r1.ok());
    CHECK(has_violation(r1, "d >= d0 > 0"));
    CHECK(r1.violations.front().region == 0);

    CoefficientSet mneg = c;
    mneg.set_movement(0, 1, constant(-0.5));
    const auto r2 = validate_coefficients(mneg, b, g);
    CHECK_FALSE(r2.ok());
    CHECK(has_violation(r2, "movement"));

    CoefficientSet theta = c;
    theta.region(1).theta = 0.0;
    CHECK(has_violation(validate_coefficients(theta, b, g), "theta > 0"));

    CoefficientSet lengths = c;
    lengths.recruit_length = 0.6;
    CHECK(has_violation(validate_coefficients(lengths, b, g), "L_b < L_m"));

    CoefficientSet neg_mu = c;
    neg_mu.region(0).natural_mortality = expr("l - 0.5");
    const auto r3 = validate_coefficients(neg_mu, b, g);
    REQUIRE_FALSE(r3.ok());
    CHECK(r3.violations.front().value == -0.5);  // worst point is reported
    CHECK(r3.violations.front().l == 0.0);

    CoefficientSet inf = c;
    inf.region(0).growth = expr("1/(l - 0.5)");
    CHECK(has_violation(validate_coefficients(inf, b, g), "finite"));

    const std::vector<CoefficientField> bad_p0{expr("a - 0.5"), constant(0.0)};
    CHECK(has_violation(validate_coefficients(c, b, g, bad_p0), "p0 >= 0"));
  }
}
