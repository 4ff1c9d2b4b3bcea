#include "fishpop/model.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "fishpop/errors.hpp"

namespace fishpop {

void check_bounds(const DomainBounds& bounds) {
  if (!(bounds.T > 0.0) || !std::isfinite(bounds.T)) throw ValidationError("T must be positive");
  if (!(bounds.A > 0.0) || !std::isfinite(bounds.A)) throw ValidationError("A must be positive");
  if (!(bounds.L > 0.0) || !std::isfinite(bounds.L)) throw ValidationError("L must be positive");
  if (bounds.regions < 1) throw ValidationError("the number of regions must be at least 1");
}

void CoefficientSet::set_movement(int from, int to, CoefficientField rate) {
  const int n = size();
  if (from < 0 || from >= n || to < 0 || to >= n || from == to)
    throw ValidationError("movement " + std::to_string(from + 1) + " -> " + std::to_string(to + 1) +
                          " does not connect two distinct regions");
  movement_[static_cast<std::size_t>(from) * n + to] = std::move(rate);
}

const CoefficientField* CoefficientSet::movement(int from, int to) const {
  const auto& slot = movement_[static_cast<std::size_t>(from) * size() + to];
  return slot ? &*slot : nullptr;
}

bool CoefficientSet::has_movement() const {
  for (const auto& m : movement_)
    if (m) return true;
  return false;
}

void MovementMatrix::apply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
}

MovementMatrix movement_matrix_at(const CoefficientSet& coeffs, double t, double a, double l) {
  const int n = coeffs.size();
  MovementMatrix M(n);
  for (int i = 0; i < n; ++i) {
    double out = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      const CoefficientField* rate = coeffs.movement(i, k);
      const double m = rate ? (*rate)(t, a, l) : 0.0;
      M(k, i) = m;
      out += m;
    }
    M(i, i) = -out;
  }
  return M;
}

namespace {

// Tracks the most extreme sample of one field against one inequality.
class Check {
 public:
  Check(std::string assumption, std::string field, int region, bool strict)
      : assumption_(std::move(assumption)), field_(std::move(field)), region_(region), strict_(strict) {}

  void sample(double value, double t, double a, double l) {
    if (!std::isfinite(value)) {
      if (!nonfinite_) nonfinite_ = Violation{"bounded (finite) values", field_, region_, t, a, l, value, true};
      return;
    }
    if (value < worst_) {
      worst_ = value;
      worst_point_ = {t, a, l};
    }
  }

  void report(std::vector<Violation>& out) const {
    if (nonfinite_) out.push_back(*nonfinite_);
    const bool violated = strict_ ? !(worst_ > 0.0) : worst_ < 0.0;
    if (violated && std::isfinite(worst_))
      out.push_back({assumption_, field_, region_, worst_point_[0], worst_point_[1], worst_point_[2], worst_, true});
  }

  double worst() const { return worst_; }

 private:
  std::string assumption_;
  std::string field_;
  int region_;
  bool strict_;
  double worst_ = std::numeric_limits<double>::infinity();
  std::array<double, 3> worst_point_{};
  std::optional<Violation> nonfinite_;
};

void sample_lattice(const CoefficientField& field, const Grid& grid, Check& check) {
  for (int k = 0; k <= grid.Nt; ++k)
    for (int j = 0; j <= grid.Na; ++j)
      for (int m = 0; m <= grid.Nl; ++m) {
        const double t = grid.time(k), a = grid.age(j), l = grid.length(m);
        check.sample(field(t, a, l), t, a, l);
      }
}

}  // namespace

ValidationReport validate_coefficients(const CoefficientSet& coeffs, const DomainBounds& bounds, const Grid& grid,
                                       std::span<const CoefficientField> initial) {
  ValidationReport report;
  auto& out = report.violations;
  const auto global = [&](std::string assumption, std::string field, double value) {
    Violation v;
    v.assumption = std::move(assumption);
    v.field = std::move(field);
    v.value = value;
    v.has_point = false;
    out.push_back(std::move(v));
  };

  if (coeffs.size() != bounds.regions)
    global("coefficients for every region", "regions", static_cast<double>(coeffs.size()));
  const double Lb = coeffs.recruit_length;
  const double Lm = coeffs.maturity_length;
  if (!(Lb > 0.0)) global("0 < L_b < L_m < L", "recruit_length", Lb);
  if (!(Lb < Lm)) global("0 < L_b < L_m < L", "recruit_length", Lb);
  if (!(Lm < bounds.L)) global("0 < L_b < L_m < L", "maturity_length", Lm);

  const std::size_t per_field = static_cast<std::size_t>(grid.Nt + 1) * grid.age_nodes() * grid.length_nodes();
  double d0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < coeffs.size(); ++i) {
    const auto& r = coeffs.region(i);
    if (!(r.theta > 0.0) || !std::isfinite(r.theta)) {
      global("theta > 0", "theta", r.theta);
      out.back().region = i;
    }
    Check disp("d >= d0 > 0", "dispersion", i, true);
    sample_lattice(r.dispersion, grid, disp);
    disp.report(out);
    d0 = std::min(d0, disp.worst());

    Check growth("bounded growth rate", "growth", i, false);
    // Growth may take either sign; only finiteness is checked.
    for (int k = 0; k <= grid.Nt; ++k)
      for (int j = 0; j <= grid.Na; ++j)
        for (int m = 0; m <= grid.Nl; ++m) {
          const double t = grid.time(k), a = grid.age(j), l = grid.length(m);
          const double g = r.growth(t, a, l);
          growth.sample(std::isfinite(g) ? 0.0 : g, t, a, l);
        }
    growth.report(out);

    const std::pair<const CoefficientField*, const char*> nonnegative[] = {
        {&r.natural_mortality, "natural_mortality"},
        {&r.fishing_mortality, "fishing_mortality"},
        {&r.weight, "weight"}};
    for (const auto& [field, name] : nonnegative) {
      Check c(std::string(name) + " >= 0", name, i, false);
      sample_lattice(*field, grid, c);
      c.report(out);
    }

    Check psi("recruitment_modulation >= 0", "recruitment_modulation", i, false);
    for (int k = 0; k <= grid.Nt; ++k) psi.sample(r.recruitment_modulation(grid.time(k), 0.0, 0.0), grid.time(k), 0, 0);
    psi.report(out);

    for (int k = 0; k < coeffs.size(); ++k) {
      const CoefficientField* rate = coeffs.movement(i, k);
      if (!rate) continue;
      Check c("movement rate m >= 0", "movement " + std::to_string(i + 1) + "->" + std::to_string(k + 1), i, false);
      sample_lattice(*rate, grid, c);
      c.report(out);
      report.samples += per_field;
    }
    report.samples += 6 * per_field;
  }

  for (std::size_t i = 0; i < initial.size(); ++i) {
    Check c("initial density p0 >= 0", "initial", static_cast<int>(i), false);
    for (int j = 0; j <= grid.Na; ++j)
      for (int m = 0; m <= grid.Nl; ++m) c.sample(initial[i](0.0, grid.age(j), grid.length(m)), 0.0, grid.age(j), grid.length(m));
    c.report(out);
  }

  report.inferred_d0 = coeffs.size() > 0 ? d0 : 0.0;
  return report;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  os << "status: " << (ok() ? "ok" : "violations") << "\n";
  os << "inferred d0: " << format_double(inferred_d0) << "\n";
  os << "samples: " << samples << " (assumptions checked on lattice nodes only)\n";
  for (const auto& v : violations) {
    os << "violation: " << v.assumption << " [" << v.field;
    if (v.region >= 0) os << ", region " << v.region + 1;
    os << "]";
    if (v.has_point)
      os << " worst at (t=" << format_double(v.t) << ", a=" << format_double(v.a) << ", l=" << format_double(v.l)
         << ")";
    os << " value " << format_double(v.value) << "\n";
  }
  return os.str();
}

}  // namespace fishpop
