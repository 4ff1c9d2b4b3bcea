#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fishpop/estimation.hpp"
#include "fishpop/grid.hpp"
#include "fishpop/mc_oracle.hpp"
#include "fishpop/solver.hpp"

namespace fishpop {

// All files are comma-separated UTF-8 text with a header row. Region
// indices are written 1-based. Numbers use the shortest representation that
// reads back to the same double.

/// Header `t,region,a,l,p`, rows ordered by region, age, length.
void write_snapshot(const State& state, const Grid& grid, const std::filesystem::path& path);

/// Reads a file written by write_snapshot into a state on `grid`. Throws
/// IoError if the file cannot be read, ParseError on malformed rows and
/// ValidationError if the rows do not cover the grid node by node.
State read_snapshot(const std::filesystem::path& path, const Grid& grid, int regions);

/// Header `t,biomass_1,recruitment_1,total_1,exiting_1,biomass_2,...`; one
/// row per time level.
void write_summary(const Trajectory& trajectory, const std::filesystem::path& path);

/// Header `step,t,kind,region,value,sd`, kind is `biomass` or `total`.
void write_observations(const ObservationSeries& obs, const std::filesystem::path& path);
ObservationSeries read_observations(const std::filesystem::path& path);

/// Header `t,region,a,l,count,density,standard_error`.
void write_histogram(const DensityHistogram& h, const Grid& grid, const std::filesystem::path& path);

/// 64-bit FNV-1a hash, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

struct RunManifest {
  std::string scenario_name;
  std::string scenario_hash;
  std::string version;
  int regions = 0;
  int Nt = 0;
  int Na = 0;
  int Nl = 0;
  double dt = 0.0;
  double dl = 0.0;
  std::string boundary;
  std::string coupling;
  int threads = 1;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> files;  // relative to the manifest directory
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

extern const char* const kVersion;

}  // namespace fishpop
