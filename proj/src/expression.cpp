#include "fishpop/expression.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <system_error>

#include "fishpop/errors.hpp"

namespace fishpop {

struct Expression::Node {
  Op op = Op::constant;
  double value = 0.0;
  Variable var = Variable::t;
  std::vector<Expression> args;
};

Expression::Expression() : Expression(constant(0.0)) {}

Expression::Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expression Expression::make(Op op, std::vector<Expression> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return Expression(std::move(n));
}

Expression Expression::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::constant;
  n->value = value;
  return Expression(std::move(n));
}

Expression Expression::variable(Variable v) {
  auto n = std::make_shared<Node>();
  n->op = Op::variable;
  n->var = v;
  return Expression(std::move(n));
}

Expression::Op Expression::op() const { return node_->op; }

bool Expression::is_constant() const { return node_->op == Op::constant; }

double Expression::constant_value() const { return node_->value; }

double Expression::operator()(double t, double a, double l) const {
  const Node& n = *node_;
  const auto arg = [&](std::size_t k) { return n.args[k](t, a, l); };
  switch (n.op) {
    case Op::constant:
      return n.value;
    case Op::variable:
      return n.var == Variable::t ? t : (n.var == Variable::a ? a : l);
    case Op::add:
      return arg(0) + arg(1);
    case Op::sub:
      return arg(0) - arg(1);
    case Op::mul:
      return arg(0) * arg(1);
    case Op::div:
      return arg(0) / arg(1);
    case Op::neg:
      return -arg(0);
    case Op::exp:
      return std::exp(arg(0));
    case Op::sin:
      return std::sin(arg(0));
    case Op::cos:
      return std::cos(arg(0));
    case Op::min:
      return std::min(arg(0), arg(1));
    case Op::max:
      return std::max(arg(0), arg(1));
    case Op::indicator: {
      const double x = arg(0);
      return (x >= arg(1) && x <= arg(2)) ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

bool Expression::depends_on(Variable v) const {
  const Node& n = *node_;
  if (n.op == Op::variable) return n.var == v;
  for (const auto& c : n.args)
    if (c.depends_on(v)) return true;
  return false;
}

// Builders used by derivative(): fold constants and drop neutral elements so
// derivatives of simple fields stay small.
Expression operator+(const Expression& x, const Expression& y) {
  if (x.is_constant() && y.is_constant()) return Expression::constant(x.constant_value() + y.constant_value());
  if (x.is_constant() && x.constant_value() == 0.0) return y;
  if (y.is_constant() && y.constant_value() == 0.0) return x;
  return Expression::make(Expression::Op::add, {x, y});
}

Expression operator-(const Expression& x, const Expression& y) {
  if (x.is_constant() && y.is_constant()) return Expression::constant(x.constant_value() - y.constant_value());
  if (y.is_constant() && y.constant_value() == 0.0) return x;
  if (x.is_constant() && x.constant_value() == 0.0) return -y;
  return Expression::make(Expression::Op::sub, {x, y});
}

Expression operator*(const Expression& x, const Expression& y) {
  if (x.is_constant() && y.is_constant()) return Expression::constant(x.constant_value() * y.constant_value());
  if ((x.is_constant() && x.constant_value() == 0.0) || (y.is_constant() && y.constant_value() == 0.0))
    return Expression::constant(0.0);
  if (x.is_constant() && x.constant_value() == 1.0) return y;
  if (y.is_constant() && y.constant_value() == 1.0) return x;
  return Expression::make(Expression::Op::mul, {x, y});
}

Expression operator/(const Expression& x, const Expression& y) {
  if (x.is_constant() && y.is_constant()) return Expression::constant(x.constant_value() / y.constant_value());
  if (x.is_constant() && x.constant_value() == 0.0) return Expression::constant(0.0);
  if (y.is_constant() && y.constant_value() == 1.0) return x;
  return Expression::make(Expression::Op::div, {x, y});
}

Expression operator-(const Expression& x) {
  if (x.is_constant()) return Expression::constant(-x.constant_value());
  if (x.op() == Expression::Op::neg) return x.node_->args[0];
  return Expression::make(Expression::Op::neg, {x});
}

Expression exp(const Expression& x) {
  if (x.is_constant()) return Expression::constant(std::exp(x.constant_value()));
  return Expression::make(Expression::Op::exp, {x});
}

Expression sin(const Expression& x) {
  if (x.is_constant()) return Expression::constant(std::sin(x.constant_value()));
  return Expression::make(Expression::Op::sin, {x});
}

Expression cos(const Expression& x) {
  if (x.is_constant()) return Expression::constant(std::cos(x.constant_value()));
  return Expression::make(Expression::Op::cos, {x});
}

Expression Expression::derivative(Variable v) const {
  const Node& n = *node_;
  if (!depends_on(v)) return constant(0.0);
  const auto& x = n.args.empty() ? *this : n.args[0];
  switch (n.op) {
    case Op::constant:
      return constant(0.0);
    case Op::variable:
      return constant(1.0);
    case Op::add:
      return x.derivative(v) + n.args[1].derivative(v);
    case Op::sub:
      return x.derivative(v) - n.args[1].derivative(v);
    case Op::mul:
      return x.derivative(v) * n.args[1] + x * n.args[1].derivative(v);
    case Op::div: {
      const auto& y = n.args[1];
      return (x.derivative(v) * y - x * y.derivative(v)) / (y * y);
    }
    case Op::neg:
      return -x.derivative(v);
    case Op::exp:
      return *this * x.derivative(v);
    case Op::sin:
      return cos(x) * x.derivative(v);
    case Op::cos:
      return -(sin(x) * x.derivative(v));
    case Op::min:
    case Op::max:
    case Op::indicator:
      break;
  }
  throw NumericalError("expression '" + to_string() + "' is not differentiable in " +
                       std::string(v == Variable::t ? "t" : v == Variable::a ? "a" : "l"));
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

namespace {

int precedence(const Expression& e) {
  using Op = Expression::Op;
  switch (e.op()) {
    case Op::add:
    case Op::sub:
      return 1;
    case Op::mul:
    case Op::div:
      return 2;
    case Op::neg:
      return 3;
    case Op::constant:
      return e.constant_value() < 0.0 || std::signbit(e.constant_value()) ? 3 : 4;
    default:
      return 4;
  }
}

}  // namespace

std::string Expression::to_string() const {
  const Node& n = *node_;
  const auto wrap = [](const Expression& e, bool parens) {
    return parens ? "(" + e.to_string() + ")" : e.to_string();
  };
  const auto binary = [&](const char* sym, int prec) {
    // Left-associative: the right operand needs parentheses at equal precedence.
    return wrap(n.args[0], precedence(n.args[0]) < prec) + sym + wrap(n.args[1], precedence(n.args[1]) <= prec);
  };
  const auto call = [&](const char* name) {
    std::string s = name;
    s += "(";
    for (std::size_t k = 0; k < n.args.size(); ++k) {
      if (k) s += ", ";
      s += n.args[k].to_string();
    }
    return s + ")";
  };
  switch (n.op) {
    case Op::constant:
      return format_double(n.value);
    case Op::variable:
      return n.var == Variable::t ? "t" : (n.var == Variable::a ? "a" : "l");
    case Op::add:
      return binary(" + ", 1);
    case Op::sub:
      return binary(" - ", 1);
    case Op::mul:
      return binary(" * ", 2);
    case Op::div:
      return binary(" / ", 2);
    case Op::neg:
      return "-" + wrap(n.args[0], precedence(n.args[0]) < 4);
    case Op::exp:
      return call("exp");
    case Op::sin:
      return call("sin");
    case Op::cos:
      return call("cos");
    case Op::min:
      return call("min");
    case Op::max:
      return call("max");
    case Op::indicator:
      return call("indicator");
  }
  return {};
}

// Recursive-descent parser over the grammar documented in the header.
class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  Expression parse() {
    Expression e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression '" + std::string(text_) + "': " + msg + " at column " +
                     std::to_string(pos_ + 1));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expression parse_sum() {
    Expression lhs = parse_product();
    for (;;) {
      if (accept('+'))
        lhs = Expression::make(Op::add, {lhs, parse_product()});
      else if (accept('-'))
        lhs = Expression::make(Op::sub, {lhs, parse_product()});
      else
        return lhs;
    }
  }

  Expression parse_product() {
    Expression lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = Expression::make(Op::mul, {lhs, parse_unary()});
      else if (accept('/'))
        lhs = Expression::make(Op::div, {lhs, parse_unary()});
      else
        return lhs;
    }
  }

  Expression parse_unary() {
    if (accept('-')) {
      Expression inner = parse_unary();
      if (inner.is_constant()) return Expression::constant(-inner.constant_value());
      return Expression::make(Op::neg, {inner});
    }
    return parse_primary();
  }

  Expression parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expression e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expression parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      pos_ = start;
      fail("malformed number");
    }
    return Expression::constant(value);
  }

  Expression parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    const std::string_view id = text_.substr(start, pos_ - start);
    if (id == "t") return Expression::variable(Variable::t);
    if (id == "a") return Expression::variable(Variable::a);
    if (id == "l") return Expression::variable(Variable::l);
    if (id == "pi") return Expression::constant(std::numbers::pi);

    struct Function {
      std::string_view name;
      Op op;
      std::size_t arity;
    };
    static constexpr std::array<Function, 6> functions{{{"exp", Op::exp, 1},
                                                        {"sin", Op::sin, 1},
                                                        {"cos", Op::cos, 1},
                                                        {"min", Op::min, 2},
                                                        {"max", Op::max, 2},
                                                        {"indicator", Op::indicator, 3}}};
    for (const auto& f : functions) {
      if (id != f.name) continue;
      expect('(');
      std::vector<Expression> args;
      args.push_back(parse_sum());
      while (accept(',')) args.push_back(parse_sum());
      expect(')');
      if (args.size() != f.arity)
        fail(std::string(f.name) + " takes " + std::to_string(f.arity) + " argument(s)");
      return Expression::make(f.op, std::move(args));
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(id) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view text) { return ExpressionParser(text).parse(); }

}  // namespace fishpop
