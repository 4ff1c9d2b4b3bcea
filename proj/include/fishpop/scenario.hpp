#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fishpop/expression.hpp"
#include "fishpop/field.hpp"
#include "fishpop/model.hpp"
#include "fishpop/solver.hpp"

namespace fishpop {

struct SnapshotSchedule {
  int every = 0;           // 0: no periodic snapshots
  std::vector<int> steps;  // explicit step indices
  bool final = true;

  bool includes(int k, int Nt) const;
};

/// Complete problem description, as read from a scenario file.
struct Scenario {
  std::string name = "scenario";
  DomainBounds bounds;
  int Nt = 10;
  int Nl = 16;
  CoefficientSet coefficients;
  std::vector<CoefficientField> initial;
  BoundaryMode boundary = BoundaryMode::paper_neumann;
  CouplingMode coupling = CouplingMode::lagged;
  double fixed_point_tolerance = 1e-10;
  int fixed_point_max_iterations = 50;
  SnapshotSchedule snapshots;
  std::string output = "out";
  /// Exact densities per region for manufactured-solution runs.
  std::optional<std::vector<Expression>> manufactured;
  /// Directory that relative table paths resolve against.
  std::filesystem::path base_dir;
};

/// Strict parse of the YAML scenario schema. Unknown keys are rejected and
/// every default is filled in. Throws ParseError (syntax, schema) with
/// line/column, or ValidationError for semantic problems such as L_b >= L_m
/// or theta <= 0.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Normalized form: every key explicit, fixed key order, numbers in shortest
/// round-trip form. parse_scenario(print_scenario(s)) reproduces s.
std::string print_scenario(const Scenario& scenario);

std::string to_string(BoundaryMode mode);
std::string to_string(CouplingMode mode);
BoundaryMode parse_boundary_mode(std::string_view text);
CouplingMode parse_coupling_mode(std::string_view text);

}  // namespace fishpop
