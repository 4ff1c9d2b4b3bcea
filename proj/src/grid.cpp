#include "fishpop/grid.hpp"

#include <cmath>
#include <limits>

#include "fishpop/errors.hpp"
#include "fishpop/expression.hpp"
#include "fishpop/model.hpp"

namespace fishpop {

Grid build_grid(const DomainBounds& bounds, int Nt, int Nl) {
  check_bounds(bounds);
  if (Nt < 1) throw ValidationError("Nt must be at least 1");
  if (Nl < 3) throw ValidationError("Nl must be at least 3");
  const double dt = bounds.T / Nt;
  const double ratio = bounds.A / dt;
  const double rounded = std::round(ratio);
  const double tol = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > tol)
    throw ValidationError("A / (T/Nt) = " + format_double(ratio) +
                          " is not an integer; the age step must equal the time step");
  Grid g;
  g.Nt = Nt;
  g.Na = static_cast<int>(rounded);
  g.Nl = Nl;
  g.T = bounds.T;
  g.A = bounds.A;
  g.L = bounds.L;
  g.dt = dt;
  g.dl = bounds.L / Nl;
  return g;
}

State::State(int regions, const Grid& grid)
    : regions_(regions),
      age_nodes_(grid.age_nodes()),
      length_nodes_(grid.length_nodes()),
      data_(static_cast<std::size_t>(regions) * grid.age_nodes() * grid.length_nodes(), 0.0) {}

void State::check_shape(const Grid& grid) const {
  if (age_nodes_ != grid.age_nodes() || length_nodes_ != grid.length_nodes())
    throw ValidationError("state shape (" + std::to_string(age_nodes_) + " x " + std::to_string(length_nodes_) +
                          ") does not match the grid (" + std::to_string(grid.age_nodes()) + " x " +
                          std::to_string(grid.length_nodes()) + ")");
}

}  // namespace fishpop
