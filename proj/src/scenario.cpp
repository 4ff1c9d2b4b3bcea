#include "fishpop/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fishpop/errors.hpp"

namespace fishpop {

bool SnapshotSchedule::includes(int k, int Nt) const {
  if (final && k == Nt) return true;
  if (every > 0 && k % every == 0) return true;
  return std::find(steps.begin(), steps.end(), k) != steps.end();
}

std::string to_string(BoundaryMode mode) { return mode == BoundaryMode::zero_flux ? "zero-flux" : "paper-neumann"; }

std::string to_string(CouplingMode mode) { return mode == CouplingMode::fixed_point ? "fixed-point" : "lagged"; }

BoundaryMode parse_boundary_mode(std::string_view text) {
  if (text == "paper-neumann") return BoundaryMode::paper_neumann;
  if (text == "zero-flux") return BoundaryMode::zero_flux;
  throw ParseError("boundary mode must be 'paper-neumann' or 'zero-flux', got '" + std::string(text) + "'");
}

CouplingMode parse_coupling_mode(std::string_view text) {
  if (text == "lagged") return CouplingMode::lagged;
  if (text == "fixed-point") return CouplingMode::fixed_point;
  throw ParseError("coupling mode must be 'lagged' or 'fixed-point', got '" + std::string(text) + "'");
}

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& msg) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) throw ParseError(msg);
  throw ParseError(msg, mark.line + 1, mark.column + 1);
}

void require_map(const YAML::Node& node, const std::string& where) {
  if (!node.IsMap()) fail_at(node, "'" + where + "' must be a mapping");
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
  require_map(node, where);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail_at(kv.first, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) fail_at(node, "'" + key + "' must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(node, "'" + key + "' has an invalid value '" + node.Scalar() + "'");
  }
}

template <class T>
T required(const YAML::Node& parent, const std::string& key, const std::string& where) {
  const YAML::Node n = parent[key];
  if (!n) fail_at(parent, "missing key '" + key + "' in " + where);
  return scalar<T>(n, key);
}

template <class T>
T optional_value(const YAML::Node& parent, const std::string& key, T fallback) {
  const YAML::Node n = parent[key];
  return n ? scalar<T>(n, key) : fallback;
}

std::vector<double> number_list(const YAML::Node& node, const std::string& key) {
  if (!node || !node.IsSequence()) fail_at(node ? node : YAML::Node(), "'" + key + "' must be a list of numbers");
  std::vector<double> out;
  for (const auto& v : node) out.push_back(scalar<double>(v, key));
  return out;
}

double parse_number(std::string_view s, const std::string& where) {
  double v = 0.0;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(where + ": '" + std::string(s) + "' is not a number");
  return v;
}

// Delimited table with header t,a,l,value on a complete tensor lattice.
LatticeTable read_table_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open table file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty table file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,a,l,value") throw ParseError(path.string() + ": header must be 't,a,l,value'", 1, 1);
  std::map<std::array<double, 3>, double> cells;
  std::set<double> ts, as, ls;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::array<double, 4> v{};
    std::size_t start = 0;
    for (int c = 0; c < 4; ++c) {
      const std::size_t end = c < 3 ? line.find(',', start) : line.size();
      if (end == std::string::npos) throw ParseError(path.string() + ": expected 4 columns", row, 1);
      v[c] = parse_number(std::string_view(line).substr(start, end - start), path.string() + " row " + std::to_string(row));
      start = end + 1;
    }
    if (!cells.emplace(std::array<double, 3>{v[0], v[1], v[2]}, v[3]).second)
      throw ParseError(path.string() + ": duplicate lattice point", row, 1);
    ts.insert(v[0]);
    as.insert(v[1]);
    ls.insert(v[2]);
  }
  LatticeTable tab;
  tab.t.assign(ts.begin(), ts.end());
  tab.a.assign(as.begin(), as.end());
  tab.l.assign(ls.begin(), ls.end());
  if (cells.size() != tab.t.size() * tab.a.size() * tab.l.size())
    throw ParseError(path.string() + ": rows do not cover a complete (t, a, l) lattice");
  for (double t : tab.t)
    for (double a : tab.a)
      for (double l : tab.l) tab.values.push_back(cells.at({t, a, l}));
  return tab;
}

CoefficientField parse_field(const YAML::Node& node, const std::string& key, const std::filesystem::path& base) {
  CoefficientField field;
  if (node.IsScalar()) {
    try {
      field = CoefficientField(Expression::parse(node.Scalar()));
    } catch (const ParseError& e) {
      fail_at(node, std::string("'") + key + "': " + e.what());
    }
  } else if (node.IsMap()) {
    check_keys(node, {"expression", "table", "table_file", "scale", "units"}, key);
    const int kinds = (node["expression"] ? 1 : 0) + (node["table"] ? 1 : 0) + (node["table_file"] ? 1 : 0);
    if (kinds != 1) fail_at(node, "'" + key + "' needs exactly one of expression, table, table_file");
    try {
      if (node["expression"]) {
        field = CoefficientField(Expression::parse(scalar<std::string>(node["expression"], key)));
      } else if (node["table"]) {
        const YAML::Node t = node["table"];
        check_keys(t, {"t", "a", "l", "values"}, key + ".table");
        LatticeTable tab;
        tab.t = t["t"] ? number_list(t["t"], "t") : std::vector<double>{0.0};
        tab.a = t["a"] ? number_list(t["a"], "a") : std::vector<double>{0.0};
        tab.l = t["l"] ? number_list(t["l"], "l") : std::vector<double>{0.0};
        tab.values = number_list(t["values"], "values");
        field = CoefficientField(std::move(tab));
      } else {
        const auto source = scalar<std::string>(node["table_file"], key);
        const std::filesystem::path p = std::filesystem::path(source).is_absolute() ? std::filesystem::path(source) : base / source;
        LatticeTable tab = read_table_file(p);
        tab.source = source;
        field = CoefficientField(std::move(tab));
      }
    } catch (const ParseError& e) {
      if (e.line() >= 0) throw;
      fail_at(node, std::string("'") + key + "': " + e.what());
    }
    if (node["scale"]) {
      const double s = scalar<double>(node["scale"], "scale");
      if (!(s > 0.0)) fail_at(node["scale"], "'" + key + ".scale' must be positive");
      field = field.scaled(s);
    }
    if (node["units"]) field.units = scalar<std::string>(node["units"], "units");
  } else {
    fail_at(node, "'" + key + "' must be an expression or a table");
  }
  field.name = key;
  return field;
}

// --- printing ---------------------------------------------------------------

void emit_numbers(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << format_double(x);
  out << YAML::EndSeq;
}

void emit_field(YAML::Emitter& out, const CoefficientField& f) {
  if (const Expression* e = f.expression()) {
    const std::string text = f.symbolic()->to_string();
    if (f.units.empty()) {
      out << text;
    } else {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "expression" << YAML::Value << text << YAML::Key << "units"
          << YAML::Value << f.units << YAML::EndMap;
    }
    (void)e;
    return;
  }
  const LatticeTable& tab = *f.table();
  out << YAML::Flow << YAML::BeginMap;
  if (!tab.source.empty()) {
    out << YAML::Key << "table_file" << YAML::Value << tab.source;
  } else {
    out << YAML::Key << "table" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "t" << YAML::Value;
    emit_numbers(out, tab.t);
    out << YAML::Key << "a" << YAML::Value;
    emit_numbers(out, tab.a);
    out << YAML::Key << "l" << YAML::Value;
    emit_numbers(out, tab.l);
    out << YAML::Key << "values" << YAML::Value;
    emit_numbers(out, tab.values);
    out << YAML::EndMap;
  }
  if (f.scale() != 1.0) out << YAML::Key << "scale" << YAML::Value << format_double(f.scale());
  if (!f.units.empty()) out << YAML::Key << "units" << YAML::Value << f.units;
  out << YAML::EndMap;
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ParseError("scenario must be a mapping", 1, 1);
  check_keys(root, {"name", "domain", "grid", "lengths", "boundary", "coupling", "snapshots", "output", "regions",
                    "movement", "manufactured"},
             "scenario");

  Scenario s;
  s.base_dir = base_dir;
  s.name = optional_value<std::string>(root, "name", "scenario");

  const YAML::Node dom = root["domain"];
  if (!dom) fail_at(root, "missing key 'domain' in scenario");
  check_keys(dom, {"T", "A", "L", "regions"}, "domain");
  s.bounds.T = required<double>(dom, "T", "domain");
  s.bounds.A = required<double>(dom, "A", "domain");
  s.bounds.L = required<double>(dom, "L", "domain");
  s.bounds.regions = required<int>(dom, "regions", "domain");
  check_bounds(s.bounds);

  const YAML::Node grid = root["grid"];
  if (!grid) fail_at(root, "missing key 'grid' in scenario");
  check_keys(grid, {"Nt", "Nl"}, "grid");
  s.Nt = required<int>(grid, "Nt", "grid");
  s.Nl = required<int>(grid, "Nl", "grid");
  build_grid(s.bounds, s.Nt, s.Nl);

  s.coefficients = CoefficientSet(s.bounds.regions);
  const YAML::Node lengths = root["lengths"];
  if (!lengths) fail_at(root, "missing key 'lengths' in scenario");
  check_keys(lengths, {"recruit", "maturity"}, "lengths");
  s.coefficients.recruit_length = required<double>(lengths, "recruit", "lengths");
  s.coefficients.maturity_length = required<double>(lengths, "maturity", "lengths");
  const double Lb = s.coefficients.recruit_length, Lm = s.coefficients.maturity_length;
  if (!(0.0 < Lb && Lb < Lm && Lm < s.bounds.L))
    throw ValidationError("lengths must satisfy 0 < L_b < L_m < L (got L_b=" + format_double(Lb) +
                          ", L_m=" + format_double(Lm) + ", L=" + format_double(s.bounds.L) + ")");

  if (const YAML::Node b = root["boundary"]) {
    try {
      s.boundary = parse_boundary_mode(scalar<std::string>(b, "boundary"));
    } catch (const ParseError& e) {
      if (e.line() >= 0) throw;
      fail_at(b, e.what());
    }
  }
  if (const YAML::Node c = root["coupling"]) {
    check_keys(c, {"mode", "tolerance", "max_iterations"}, "coupling");
    if (c["mode"]) {
      try {
        s.coupling = parse_coupling_mode(scalar<std::string>(c["mode"], "mode"));
      } catch (const ParseError& e) {
        if (e.line() >= 0) throw;
        fail_at(c["mode"], e.what());
      }
    }
    s.fixed_point_tolerance = optional_value<double>(c, "tolerance", s.fixed_point_tolerance);
    s.fixed_point_max_iterations = optional_value<int>(c, "max_iterations", s.fixed_point_max_iterations);
    if (!(s.fixed_point_tolerance > 0.0)) fail_at(c, "coupling tolerance must be positive");
    if (s.fixed_point_max_iterations < 1) fail_at(c, "coupling max_iterations must be at least 1");
  }
  if (const YAML::Node snap = root["snapshots"]) {
    check_keys(snap, {"every", "steps", "final"}, "snapshots");
    s.snapshots.every = optional_value<int>(snap, "every", 0);
    s.snapshots.final = optional_value<bool>(snap, "final", true);
    if (snap["steps"]) {
      for (double k : number_list(snap["steps"], "steps")) {
        if (k < 0 || k > s.Nt || k != static_cast<int>(k)) fail_at(snap["steps"], "snapshot steps must be integers in [0, Nt]");
        s.snapshots.steps.push_back(static_cast<int>(k));
      }
    }
    if (s.snapshots.every < 0) fail_at(snap, "snapshots.every must be >= 0");
  }
  s.output = optional_value<std::string>(root, "output", "out/" + s.name);

  const YAML::Node regions = root["regions"];
  if (!regions || !regions.IsSequence()) fail_at(regions ? regions : root, "'regions' must be a list");
  if (static_cast<int>(regions.size()) != s.bounds.regions)
    fail_at(regions, "domain.regions is " + std::to_string(s.bounds.regions) + " but " +
                         std::to_string(regions.size()) + " regions are listed");
  for (int i = 0; i < s.bounds.regions; ++i) {
    const YAML::Node r = regions[static_cast<std::size_t>(i)];
    const std::string where = "regions[" + std::to_string(i + 1) + "]";
    check_keys(r, {"growth", "dispersion", "natural_mortality", "fishing_mortality", "weight",
                   "recruitment_modulation", "theta", "initial"},
               where);
    auto& rc = s.coefficients.region(i);
    const auto field_or = [&](const char* key, CoefficientField fallback) {
      CoefficientField f = r[key] ? parse_field(r[key], key, base_dir) : std::move(fallback);
      f.name = key;
      return f;
    };
    if (!r["dispersion"]) fail_at(r, "missing key 'dispersion' in " + where);
    if (!r["initial"]) fail_at(r, "missing key 'initial' in " + where);
    rc.growth = field_or("growth", CoefficientField::constant(0.0));
    rc.dispersion = field_or("dispersion", {});
    rc.natural_mortality = field_or("natural_mortality", CoefficientField::constant(0.0));
    rc.fishing_mortality = field_or("fishing_mortality", CoefficientField::constant(0.0));
    rc.weight = field_or("weight", CoefficientField::constant(1.0));
    rc.recruitment_modulation = field_or("recruitment_modulation", CoefficientField::constant(1.0));
    if (rc.recruitment_modulation.depends_on(Variable::a) || rc.recruitment_modulation.depends_on(Variable::l))
      fail_at(r["recruitment_modulation"], "'recruitment_modulation' must depend on t only");
    rc.theta = required<double>(r, "theta", where);
    if (!(rc.theta > 0.0))
      throw ValidationError(where + ": theta > 0 is required (got " + format_double(rc.theta) + ")");
    s.initial.push_back(field_or("initial", {}));
  }

  if (const YAML::Node mv = root["movement"]) {
    if (!mv.IsSequence()) fail_at(mv, "'movement' must be a list");
    std::set<std::pair<int, int>> seen;
    for (const auto& e : mv) {
      check_keys(e, {"from", "to", "rate"}, "movement");
      const int from = required<int>(e, "from", "movement");
      const int to = required<int>(e, "to", "movement");
      if (from < 1 || from > s.bounds.regions || to < 1 || to > s.bounds.regions || from == to)
        fail_at(e, "movement must connect two distinct regions in [1, " + std::to_string(s.bounds.regions) + "]");
      if (!seen.insert({from, to}).second) fail_at(e, "duplicate movement entry");
      if (!e["rate"]) fail_at(e, "missing key 'rate' in movement");
      CoefficientField rate = parse_field(e["rate"], "rate", base_dir);
      rate.name = "movement " + std::to_string(from) + "->" + std::to_string(to);
      s.coefficients.set_movement(from - 1, to - 1, std::move(rate));
    }
  }

  if (const YAML::Node mf = root["manufactured"]) {
    if (!mf.IsSequence() || static_cast<int>(mf.size()) != s.bounds.regions)
      fail_at(mf, "'manufactured' must list one exact solution per region");
    std::vector<Expression> exact;
    for (const auto& e : mf) {
      try {
        exact.push_back(Expression::parse(scalar<std::string>(e, "manufactured")));
      } catch (const ParseError& err) {
        if (err.line() >= 0) throw;
        fail_at(e, err.what());
      }
    }
    s.manufactured = std::move(exact);
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

std::string print_scenario(const Scenario& s) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << s.name;
  out << YAML::Key << "domain" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "T" << YAML::Value
      << format_double(s.bounds.T) << YAML::Key << "A" << YAML::Value << format_double(s.bounds.A) << YAML::Key << "L"
      << YAML::Value << format_double(s.bounds.L) << YAML::Key << "regions" << YAML::Value << s.bounds.regions
      << YAML::EndMap;
  out << YAML::Key << "grid" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "Nt" << YAML::Value << s.Nt
      << YAML::Key << "Nl" << YAML::Value << s.Nl << YAML::EndMap;
  out << YAML::Key << "lengths" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "recruit" << YAML::Value
      << format_double(s.coefficients.recruit_length) << YAML::Key << "maturity" << YAML::Value
      << format_double(s.coefficients.maturity_length) << YAML::EndMap;
  out << YAML::Key << "boundary" << YAML::Value << to_string(s.boundary);
  out << YAML::Key << "coupling" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "mode" << YAML::Value
      << to_string(s.coupling) << YAML::Key << "tolerance" << YAML::Value << format_double(s.fixed_point_tolerance)
      << YAML::Key << "max_iterations" << YAML::Value << s.fixed_point_max_iterations << YAML::EndMap;
  out << YAML::Key << "snapshots" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "every"
      << YAML::Value << s.snapshots.every << YAML::Key << "steps" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (int k : s.snapshots.steps) out << k;
  out << YAML::EndSeq << YAML::Key << "final" << YAML::Value << s.snapshots.final << YAML::EndMap;
  out << YAML::Key << "output" << YAML::Value << s.output;

  out << YAML::Key << "regions" << YAML::Value << YAML::BeginSeq;
  for (int i = 0; i < s.coefficients.size(); ++i) {
    const auto& r = s.coefficients.region(i);
    out << YAML::BeginMap;
    const std::pair<const char*, const CoefficientField*> fields[] = {
        {"growth", &r.growth},
        {"dispersion", &r.dispersion},
        {"natural_mortality", &r.natural_mortality},
        {"fishing_mortality", &r.fishing_mortality},
        {"weight", &r.weight},
        {"recruitment_modulation", &r.recruitment_modulation}};
    for (const auto& [key, f] : fields) {
      out << YAML::Key << key << YAML::Value;
      emit_field(out, *f);
    }
    out << YAML::Key << "theta" << YAML::Value << format_double(r.theta);
    out << YAML::Key << "initial" << YAML::Value;
    emit_field(out, s.initial.at(static_cast<std::size_t>(i)));
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "movement" << YAML::Value << YAML::BeginSeq;
  for (int i = 0; i < s.coefficients.size(); ++i)
    for (int j = 0; j < s.coefficients.size(); ++j)
      if (const auto* m = s.coefficients.movement(i, j)) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "from" << YAML::Value << i + 1 << YAML::Key << "to"
            << YAML::Value << j + 1 << YAML::Key << "rate" << YAML::Value;
        emit_field(out, *m);
        out << YAML::EndMap;
      }
  out << YAML::EndSeq;

  if (s.manufactured) {
    out << YAML::Key << "manufactured" << YAML::Value << YAML::BeginSeq;
    for (const auto& e : *s.manufactured) out << e.to_string();
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace fishpop
