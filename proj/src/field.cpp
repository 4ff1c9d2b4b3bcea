#include "fishpop/field.hpp"

#include <algorithm>
#include <cmath>

#include "fishpop/errors.hpp"
#include "fishpop/model.hpp"

namespace fishpop {

namespace {

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) throw ParseError(std::string("table axis '") + name + "' is empty");
  for (std::size_t k = 0; k < axis.size(); ++k) {
    if (!std::isfinite(axis[k])) throw ParseError(std::string("table axis '") + name + "' has a non-finite node");
    if (k > 0 && !(axis[k] > axis[k - 1]))
      throw ParseError(std::string("table axis '") + name + "' is not strictly increasing");
  }
}

// Bracketing cell and weight of the upper node; clamps outside the hull.
struct Bracket {
  std::size_t lo;
  std::size_t hi;
  double w;
};

Bracket bracket(const std::vector<double>& axis, double x) {
  const std::size_t n = axis.size();
  if (n == 1 || x <= axis.front()) return {0, 0, 0.0};
  if (x >= axis.back()) return {n - 1, n - 1, 0.0};
  const auto it = std::upper_bound(axis.begin(), axis.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - axis.begin());
  const std::size_t lo = hi - 1;
  return {lo, hi, (x - axis[lo]) / (axis[hi] - axis[lo])};
}

}  // namespace

CoefficientField::CoefficientField(Expression e) : repr_(std::move(e)) {}

CoefficientField::CoefficientField(LatticeTable table) {
  check_axis(table.t, "t");
  check_axis(table.a, "a");
  check_axis(table.l, "l");
  const std::size_t expected = table.t.size() * table.a.size() * table.l.size();
  if (table.values.size() != expected)
    throw ParseError("table has " + std::to_string(table.values.size()) + " values, lattice needs " +
                     std::to_string(expected));
  repr_ = std::move(table);
}

double CoefficientField::operator()(double t, double a, double l) const {
  if (const auto* e = std::get_if<Expression>(&repr_)) return scale_ * (*e)(t, a, l);
  const auto& tab = std::get<LatticeTable>(repr_);
  const Bracket bt = bracket(tab.t, t);
  const Bracket ba = bracket(tab.a, a);
  const Bracket bl = bracket(tab.l, l);
  double sum = 0.0;
  for (int dt = 0; dt < 2; ++dt) {
    const double wt = dt ? bt.w : 1.0 - bt.w;
    if (wt == 0.0) continue;
    for (int da = 0; da < 2; ++da) {
      const double wa = da ? ba.w : 1.0 - ba.w;
      if (wa == 0.0) continue;
      for (int dl = 0; dl < 2; ++dl) {
        const double wl = dl ? bl.w : 1.0 - bl.w;
        if (wl == 0.0) continue;
        sum += wt * wa * wl * tab.at(dt ? bt.hi : bt.lo, da ? ba.hi : ba.lo, dl ? bl.hi : bl.lo);
      }
    }
  }
  return scale_ * sum;
}

CoefficientField CoefficientField::scaled(double factor) const {
  CoefficientField out = *this;
  out.scale_ *= factor;
  return out;
}

std::optional<Expression> CoefficientField::symbolic() const {
  const auto* e = std::get_if<Expression>(&repr_);
  if (!e) return std::nullopt;
  if (scale_ == 1.0) return *e;
  return Expression::constant(scale_) * *e;
}

bool CoefficientField::depends_on(Variable v) const {
  if (const auto* e = std::get_if<Expression>(&repr_)) return e->depends_on(v);
  const auto& tab = std::get<LatticeTable>(repr_);
  switch (v) {
    case Variable::t:
      return tab.t.size() > 1;
    case Variable::a:
      return tab.a.size() > 1;
    case Variable::l:
      return tab.l.size() > 1;
  }
  return true;
}

double evaluate_field(const CoefficientField& field, const DomainBounds& bounds, double t, double a, double l) {
  const auto inside = [](double x, double hi) {
    const double slack = 1e-12 * std::max(1.0, hi);
    return x >= -slack && x <= hi + slack;
  };
  if (!inside(t, bounds.T) || !inside(a, bounds.A) || !inside(l, bounds.L))
    throw ValidationError("point (t=" + format_double(t) + ", a=" + format_double(a) + ", l=" + format_double(l) +
                          ") is outside the domain");
  return field(t, a, l);
}

}  // namespace fishpop
