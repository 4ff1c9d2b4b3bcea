#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fishpop {

enum class Variable { t, a, l };

/// Closed-form scalar expression in (t, a, l).
///
/// Grammar: decimal literals, the constant `pi`, the variables `t`, `a`, `l`,
/// binary `+ - * /`, unary minus, parentheses and the functions `exp(x)`,
/// `sin(x)`, `cos(x)`, `min(x, y)`, `max(x, y)` and `indicator(x, lo, hi)`
/// (1 on the closed interval [lo, hi], 0 elsewhere).
///
/// Nodes are immutable and shared, so copies are cheap and evaluation is safe
/// from any number of threads.
class Expression {
 public:
  enum class Op { constant, variable, add, sub, mul, div, neg, exp, sin, cos, min, max, indicator };

  /// The constant 0.
  Expression();

  /// Throws ParseError with the 1-based column of the offending token.
  static Expression parse(std::string_view text);
  static Expression constant(double value);
  static Expression variable(Variable v);

  double operator()(double t, double a, double l) const;

  /// Symbolic partial derivative. Throws NumericalError when the expression
  /// uses min/max/indicator with an argument that depends on `v`.
  Expression derivative(Variable v) const;

  bool depends_on(Variable v) const;
  bool is_constant() const;
  /// Value of a constant expression. Meaningful only when is_constant().
  double constant_value() const;

  /// Text that parses back to a structurally identical expression.
  std::string to_string() const;

  friend Expression operator+(const Expression& x, const Expression& y);
  friend Expression operator-(const Expression& x, const Expression& y);
  friend Expression operator*(const Expression& x, const Expression& y);
  friend Expression operator/(const Expression& x, const Expression& y);
  friend Expression operator-(const Expression& x);
  friend Expression exp(const Expression& x);
  friend Expression sin(const Expression& x);
  friend Expression cos(const Expression& x);

  Op op() const;

 private:
  struct Node;
  explicit Expression(std::shared_ptr<const Node> node);
  static Expression make(Op op, std::vector<Expression> args);

  friend class ExpressionParser;
  std::shared_ptr<const Node> node_;
};

/// Shortest decimal text that reads back to exactly `value`.
std::string format_double(double value);

}  // namespace fishpop
