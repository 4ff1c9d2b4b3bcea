#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fishpop/field.hpp"
#include "fishpop/grid.hpp"

namespace fishpop {

struct DomainBounds {
  double T = 1.0;
  double A = 1.0;
  double L = 1.0;
  int regions = 1;
};

/// Throws ValidationError unless T, A, L > 0 and regions >= 1.
void check_bounds(const DomainBounds& bounds);

struct RegionCoefficients {
  CoefficientField growth;
  CoefficientField dispersion;
  CoefficientField natural_mortality;
  CoefficientField fishing_mortality;
  CoefficientField weight = CoefficientField::constant(1.0);
  /// Time-only recruitment modulation psi_i(t).
  CoefficientField recruitment_modulation = CoefficientField::constant(1.0);
  /// Beverton-Holt half-saturation.
  double theta = 1.0;

  double total_mortality(double t, double a, double l) const {
    return natural_mortality(t, a, l) + fishing_mortality(t, a, l);
  }
};

/// Every coefficient of the model. Movement rates are stored densely by
/// (from, to); an empty slot means the regions are not adjacent.
class CoefficientSet {
 public:
  CoefficientSet() = default;
  explicit CoefficientSet(int regions)
      : regions_(static_cast<std::size_t>(regions)), movement_(static_cast<std::size_t>(regions) * regions) {}

  int size() const { return static_cast<int>(regions_.size()); }
  RegionCoefficients& region(int i) { return regions_.at(static_cast<std::size_t>(i)); }
  const RegionCoefficients& region(int i) const { return regions_.at(static_cast<std::size_t>(i)); }

  void set_movement(int from, int to, CoefficientField rate);
  const CoefficientField* movement(int from, int to) const;
  bool has_movement() const;

  /// L_b: recruits are born with lengths in [0, L_b].
  double recruit_length = 0.1;
  /// L_m: fish are mature (spawn) from this length on.
  double maturity_length = 0.5;

 private:
  std::vector<RegionCoefficients> regions_;
  std::vector<std::optional<CoefficientField>> movement_;
};

/// Dense N x N generator of migration: M(i,j) = m_{j->i} off the diagonal and
/// M(i,i) = -sum_{k != i} m_{i->k}, so every column sums to zero.
class MovementMatrix {
 public:
  explicit MovementMatrix(int n) : n_(n), data_(static_cast<std::size_t>(n) * n, 0.0) {}

  int size() const { return n_; }
  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * n_ + j]; }

  /// y = M x
  void apply(std::span<const double> x, std::span<double> y) const;

 private:
  int n_;
  std::vector<double> data_;
};

MovementMatrix movement_matrix_at(const CoefficientSet& coeffs, double t, double a, double l);

struct Violation {
  std::string assumption;
  std::string field;
  int region = -1;  // 0-based; -1 for global conditions
  double t = 0.0;
  double a = 0.0;
  double l = 0.0;
  double value = 0.0;
  bool has_point = true;
};

/// Result of checking the model assumptions on the simulation lattice.
struct ValidationReport {
  std::vector<Violation> violations;
  /// Smallest sampled dispersion over all regions.
  double inferred_d0 = 0.0;
  std::size_t samples = 0;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Checks every assumption on the data at all lattice nodes (t_k, a_j, l_m):
/// m >= 0, d >= d0 > 0, mu >= 0, f >= 0, psi >= 0, w >= 0, p0 >= 0, all values
/// finite, theta > 0 and 0 < L_b < L_m < L. Conditions that hold "almost
/// everywhere" can only be sampled; the report covers the lattice only.
ValidationReport validate_coefficients(const CoefficientSet& coeffs, const DomainBounds& bounds, const Grid& grid,
                                       std::span<const CoefficientField> initial = {});

}  // namespace fishpop
