#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fishpop {

struct DomainBounds;

/// Uniform lattice of (t, a, l). Time and age share one step so a cohort
/// moves exactly one age node per time step.
struct Grid {
  int Nt = 1;
  int Na = 1;
  int Nl = 3;
  double T = 1.0;
  double A = 1.0;
  double L = 1.0;
  double dt = 1.0;
  double dl = 1.0;

  double da() const { return dt; }
  int age_nodes() const { return Na + 1; }
  int length_nodes() const { return Nl + 1; }

  double time(int k) const { return k == Nt ? T : k * dt; }
  double age(int j) const { return j == Na ? A : j * dt; }
  double length(int m) const { return m == Nl ? L : m * dl; }

  /// Trapezoid weight of a length node (dl inside, dl/2 on the walls).
  double length_weight(int m) const { return (m == 0 || m == Nl) ? 0.5 * dl : dl; }
  double age_weight(int j) const { return (j == 0 || j == Na) ? 0.5 * dt : dt; }
};

/// Throws ValidationError when Nt < 1, Nl < 3, or A is not a whole number
/// of time steps.
Grid build_grid(const DomainBounds& bounds, int Nt, int Nl);

/// Nodal densities p_i(t_k, a_j, l_m) for every region at one time level.
class State {
 public:
  State() = default;
  State(int regions, const Grid& grid);

  int regions() const { return regions_; }
  int age_nodes() const { return age_nodes_; }
  int length_nodes() const { return length_nodes_; }

  double& operator()(int i, int j, int m) { return data_[index(i, j, m)]; }
  double operator()(int i, int j, int m) const { return data_[index(i, j, m)]; }

  std::span<double> profile(int i, int j) {
    return {data_.data() + index(i, j, 0), static_cast<std::size_t>(length_nodes_)};
  }
  std::span<const double> profile(int i, int j) const {
    return {data_.data() + index(i, j, 0), static_cast<std::size_t>(length_nodes_)};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const State& other) const {
    return regions_ == other.regions_ && age_nodes_ == other.age_nodes_ && length_nodes_ == other.length_nodes_;
  }
  /// Throws ValidationError if the state was not built for `grid`.
  void check_shape(const Grid& grid) const;

  int step = 0;
  double time = 0.0;

 private:
  std::size_t index(int i, int j, int m) const {
    return (static_cast<std::size_t>(i) * age_nodes_ + j) * length_nodes_ + m;
  }

  int regions_ = 0;
  int age_nodes_ = 0;
  int length_nodes_ = 0;
  std::vector<double> data_;
};

}  // namespace fishpop
