#include "fishpop/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fishpop/errors.hpp"
#include "fishpop/expression.hpp"

namespace fishpop {

const char* const kVersion = "0.1.0";

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (in.bad()) throw IoError("read from " + path.string() + " failed");
  return lines;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double number(std::string_view s, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(path.string() + ": '" + std::string(s) + "' is not a number", static_cast<int>(line), -1);
  return v;
}

int integer(std::string_view s, const std::filesystem::path& path, std::size_t line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(path.string() + ": '" + std::string(s) + "' is not an integer", static_cast<int>(line), -1);
  return v;
}

void expect_header(const std::vector<std::string>& lines, std::string_view header, const std::filesystem::path& path) {
  if (lines.empty() || lines.front() != header)
    throw ParseError(path.string() + ": expected header '" + std::string(header) + "'", 1, -1);
}

}  // namespace

void write_snapshot(const State& state, const Grid& grid, const std::filesystem::path& path) {
  state.check_shape(grid);
  auto out = open_out(path);
  out << "t,region,a,l,p\n";
  const std::string t = format_double(state.time);
  for (int i = 0; i < state.regions(); ++i)
    for (int j = 0; j <= grid.Na; ++j)
      for (int m = 0; m <= grid.Nl; ++m)
        out << t << ',' << i + 1 << ',' << format_double(grid.age(j)) << ',' << format_double(grid.length(m)) << ','
            << format_double(state(i, j, m)) << '\n';
  finish(out, path);
}

State read_snapshot(const std::filesystem::path& path, const Grid& grid, int regions) {
  const auto lines = read_lines(path);
  expect_header(lines, "t,region,a,l,p", path);
  State s(regions, grid);
  const std::size_t expected = static_cast<std::size_t>(regions) * grid.age_nodes() * grid.length_nodes();
  if (lines.size() - 1 != expected)
    throw ValidationError(path.string() + ": " + std::to_string(lines.size() - 1) + " rows, expected " +
                          std::to_string(expected));
  std::size_t row = 1;
  for (int i = 0; i < regions; ++i)
    for (int j = 0; j <= grid.Na; ++j)
      for (int m = 0; m <= grid.Nl; ++m, ++row) {
        const auto f = split(lines[row]);
        if (f.size() != 5) throw ParseError(path.string() + ": expected 5 columns", static_cast<int>(row + 1), -1);
        const double t = number(f[0], path, row + 1);
        const int region = integer(f[1], path, row + 1);
        const double a = number(f[2], path, row + 1);
        const double l = number(f[3], path, row + 1);
        if (region != i + 1 || a != grid.age(j) || l != grid.length(m))
          throw ValidationError(path.string() + ": row " + std::to_string(row + 1) + " is not node (" +
                                std::to_string(i + 1) + ", " + std::to_string(j) + ", " + std::to_string(m) + ")");
        if (row == 1) s.time = t;
        s(i, j, m) = number(f[4], path, row + 1);
      }
  s.step = static_cast<int>(std::lround(s.time / grid.dt));
  return s;
}

void write_summary(const Trajectory& trajectory, const std::filesystem::path& path) {
  auto out = open_out(path);
  const std::size_t N = trajectory.summary.empty() ? 0 : trajectory.summary.front().biomass.size();
  out << 't';
  for (std::size_t i = 1; i <= N; ++i)
    out << ",biomass_" << i << ",recruitment_" << i << ",total_" << i << ",exiting_" << i;
  out << '\n';
  for (const auto& row : trajectory.summary) {
    out << format_double(row.t);
    for (std::size_t i = 0; i < N; ++i)
      out << ',' << format_double(row.biomass[i]) << ',' << format_double(row.recruitment[i]) << ','
          << format_double(row.total[i]) << ',' << format_double(row.exiting[i]);
    out << '\n';
  }
  finish(out, path);
}

void write_observations(const ObservationSeries& obs, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "step,t,kind,region,value,sd\n";
  for (const auto& o : obs)
    out << o.step << ',' << format_double(o.t) << ',' << (o.kind == ObservationKind::biomass ? "biomass" : "total")
        << ',' << o.region + 1 << ',' << format_double(o.value) << ',' << format_double(o.sd) << '\n';
  finish(out, path);
}

ObservationSeries read_observations(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  expect_header(lines, "step,t,kind,region,value,sd", path);
  ObservationSeries obs;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    const auto f = split(lines[row]);
    const int line = static_cast<int>(row + 1);
    if (f.size() != 6) throw ParseError(path.string() + ": expected 6 columns", line, -1);
    Observation o;
    o.step = integer(f[0], path, row + 1);
    o.t = number(f[1], path, row + 1);
    if (f[2] == "biomass")
      o.kind = ObservationKind::biomass;
    else if (f[2] == "total")
      o.kind = ObservationKind::total;
    else
      throw ParseError(path.string() + ": unknown observation kind '" + std::string(f[2]) + "'", line, -1);
    o.region = integer(f[3], path, row + 1) - 1;
    o.value = number(f[4], path, row + 1);
    o.sd = number(f[5], path, row + 1);
    if (o.step < 0 || o.region < 0) throw ParseError(path.string() + ": negative step or region", line, -1);
    if (!std::isfinite(o.value)) throw ValidationError(path.string() + ": non-finite observation on line " + std::to_string(line));
    if (!(o.sd > 0.0)) throw ValidationError(path.string() + ": sd must be positive on line " + std::to_string(line));
    obs.push_back(o);
  }
  return obs;
}

void write_histogram(const DensityHistogram& h, const Grid& grid, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "t,region,a,l,count,density,standard_error\n";
  const std::string t = format_double(h.t);
  for (int i = 0; i < h.regions; ++i)
    for (int j = 0; j <= grid.Na; ++j)
      for (int m = 0; m <= grid.Nl; ++m) {
        const auto c = h.index(i, j, m);
        out << t << ',' << i + 1 << ',' << format_double(grid.age(j)) << ',' << format_double(grid.length(m)) << ','
            << h.counts[c] << ',' << format_double(h.density[c]) << ',' << format_double(h.standard_error[c]) << '\n';
      }
  finish(out, path);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["scenario"] = m.scenario_name;
  j["scenario_hash"] = m.scenario_hash;
  j["version"] = m.version;
  j["grid"] = {{"regions", m.regions}, {"Nt", m.Nt}, {"Na", m.Na}, {"Nl", m.Nl}, {"dt", m.dt}, {"dl", m.dl}};
  j["boundary"] = m.boundary;
  j["coupling"] = m.coupling;
  j["threads"] = m.threads;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  j["files"] = m.files;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

}  // namespace fishpop
