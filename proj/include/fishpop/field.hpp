#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fishpop/expression.hpp"

namespace fishpop {

struct DomainBounds;

/// Values on a tensor lattice in (t, a, l), row-major with l fastest.
/// An axis with a single node means the table is constant along it.
struct LatticeTable {
  std::vector<double> t;
  std::vector<double> a;
  std::vector<double> l;
  std::vector<double> values;
  /// File the table was read from, if any; kept so scenarios print back the reference.
  std::string source;

  double at(std::size_t it, std::size_t ia, std::size_t il) const {
    return values[(it * a.size() + ia) * l.size() + il];
  }
};

/// A coefficient of the model: a closed-form expression or a lattice table
/// with multilinear interpolation, times a positive scale factor.
class CoefficientField {
 public:
  CoefficientField() = default;
  explicit CoefficientField(Expression e);
  /// Throws ParseError when axes are empty or unsorted or the value count
  /// does not match the lattice.
  explicit CoefficientField(LatticeTable table);

  static CoefficientField constant(double c) { return CoefficientField(Expression::constant(c)); }
  static CoefficientField parse(const std::string& text) { return CoefficientField(Expression::parse(text)); }

  /// Unchecked evaluation. Tables clamp to the lattice hull.
  double operator()(double t, double a, double l) const;

  CoefficientField scaled(double factor) const;
  double scale() const { return scale_; }

  bool is_table() const { return std::holds_alternative<LatticeTable>(repr_); }
  const LatticeTable* table() const { return std::get_if<LatticeTable>(&repr_); }
  /// The unscaled expression, or nullptr for tables.
  const Expression* expression() const { return std::get_if<Expression>(&repr_); }

  /// The field (including its scale) as an expression; empty for tables.
  std::optional<Expression> symbolic() const;

  bool depends_on(Variable v) const;

  std::string name;
  std::string units;

 private:
  std::variant<Expression, LatticeTable> repr_;
  double scale_ = 1.0;
};

/// Checked evaluation: throws ValidationError if (t, a, l) lies outside the
/// closed domain [0,T] x [0,A] x [0,L] (a relative slack of 1e-12 is allowed).
double evaluate_field(const CoefficientField& field, const DomainBounds& bounds, double t, double a, double l);

}  // namespace fishpop
