#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fishpop/errors.hpp"
#include "fishpop/io.hpp"
#include "fishpop/scenario.hpp"
#include "support.hpp"

using namespace fishpop;
using namespace fishpop::test;

namespace fs = std::filesystem;

namespace {

fs::path scenario_path(const char* name) { return fs::path(FISHPOP_SOURCE_DIR) / "scenarios" / name; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fishpop_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kMinimal = R"(name: tiny
domain: {T: 1, A: 1, L: 1, regions: 1}
grid: {Nt: 4, Nl: 8}
lengths: {recruit: 0.2, maturity: 0.5}
regions:
  - growth: 0.1
    dispersion: 0.01
    natural_mortality: 0.1
    theta: 1
    initial: 1
)";

std::string with(const std::string& from, const std::string& to) {
  std::string s = kMinimal;
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("bundled scenarios parse") {
    const Scenario demo = load_scenario(scenario_path("demo.yaml"));
    CHECK(demo.bounds.regions == 2);
    CHECK(demo.Nt == 20);
    CHECK(demo.coefficients.movement(0, 1) != nullptr);
    CHECK(demo.coefficients.movement(1, 0) != nullptr);
    CHECK(demo.coefficients.region(1).fishing_mortality.units == "1/year");
    const Scenario mms = load_scenario(scenario_path("mms.yaml"));
    REQUIRE(mms.manufactured.has_value());
    CHECK(mms.manufactured->size() == 2u);
    const Scenario oracle = load_scenario(scenario_path("oracle.yaml"));
    CHECK(oracle.boundary == BoundaryMode::zero_flux);
  }

  TEST_CASE("defaults are filled in") {
    const Scenario s = parse_scenario(kMinimal);
    CHECK(s.boundary == BoundaryMode::paper_neumann);
    CHECK(s.coupling == CouplingMode::lagged);
    CHECK(s.coefficients.region(0).weight(0, 0, 0.7) == 1.0);
    CHECK(s.coefficients.region(0).fishing_mortality(0, 0, 0.7) == 0.0);
    CHECK_FALSE(s.coefficients.has_movement());
  }

  TEST_CASE("normal form is a fixed point") {
    for (const char* name : {"demo.yaml", "mms.yaml", "oracle.yaml"}) {
      CAPTURE(name);
      const Scenario s = load_scenario(scenario_path(name));
      const std::string once = print_scenario(s);
      const std::string twice = print_scenario(parse_scenario(once));
      CHECK(once == twice);
    }
  }

  TEST_CASE("schema errors") {
    try {
      parse_scenario(with("grid:", "foo: 1\ngrid:"));
      FAIL("unknown key accepted");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("foo") != std::string::npos);
      CHECK(e.line() >= 1);
    }
    try {
      parse_scenario(with("theta: 1", "theta: 0"));
      FAIL("theta = 0 accepted");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("theta > 0") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_scenario(with("recruit: 0.2", "recruit: 0.7")), ValidationError);
    CHECK_THROWS_AS(parse_scenario(with("growth: 0.1", "growth: 0.1 +")), ParseError);
    CHECK_THROWS_AS(parse_scenario(with("Nt: 4", "Nt: four")), ParseError);
    CHECK_THROWS_AS(parse_scenario("domain: [1, 2"), ParseError);
    CHECK_THROWS_AS(parse_scenario(with("Nl: 8", "Nl: 2")), ValidationError);
    CHECK_THROWS_AS(load_scenario(scratch("missing.yaml")), IoError);
  }

  TEST_CASE("tables inline and from files") {
    const fs::path table = scratch("growth.csv");
    {
      std::ofstream out(table);
      out << "t,a,l,value\n0,0,0,0.5\n0,0,1,0.1\n";
    }
    const std::string text = with("growth: 0.1", "growth: {table_file: " + table.string() + "}");
    const Scenario s = parse_scenario(text);
    CHECK(s.coefficients.region(0).growth(0, 0, 0.5) == doctest::Approx(0.3));
    const Scenario again = parse_scenario(print_scenario(s));
    CHECK(again.coefficients.region(0).growth(0, 0, 0.25) == s.coefficients.region(0).growth(0, 0, 0.25));

    const Scenario inl = parse_scenario(
        with("growth: 0.1", "growth:\n      table: {t: [0], a: [0], l: [0, 1], values: [0.5, 0.1]}\n      scale: 2"));
    CHECK(inl.coefficients.region(0).growth(0, 0, 0.5) == doctest::Approx(0.6));
    CHECK_THROWS_AS(parse_scenario(with("growth: 0.1", "growth: {table: {t: [0], a: [0], l: [0, 1], values: [1]}}")),
                    ParseError);
    CHECK_THROWS_AS(parse_scenario(with("growth: 0.1", "growth: {table_file: /nonexistent/t.csv}")), IoError);
  }
}

TEST_SUITE("io") {
  TEST_CASE("snapshot round-trip is exact") {
    std::mt19937_64 rng(8);
    const Scenario s = random_scenario(rng, 2, 10, 12);
    const Trajectory tr = run(s);
    const Grid g = build_grid(s.bounds, s.Nt, s.Nl);
    const fs::path p = scratch("snap.csv");
    write_snapshot(tr.final_state, g, p);
    CHECK(slurp(p).rfind("t,region,a,l,p\n", 0) == 0);
    const State back = read_snapshot(p, g, 2);
    CHECK(back.step == tr.final_state.step);
    for (std::size_t k = 0; k < back.values().size(); ++k) CHECK(back.values()[k] == tr.final_state.values()[k]);
    CHECK_THROWS_AS(read_snapshot(p, build_grid(s.bounds, s.Nt, s.Nl + 1), 2), ValidationError);
    CHECK_THROWS_AS(read_snapshot(scratch("none.csv"), g, 2), IoError);
  }

  TEST_CASE("zero state writes zero densities") {
    const Scenario s = basic_scenario();
    const Trajectory tr = run(s);
    const Grid g = build_grid(s.bounds, s.Nt, s.Nl);
    const fs::path p = scratch("zero.csv");
    write_snapshot(tr.final_state, g, p);
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
      CHECK(line.substr(line.rfind(',') + 1) == "0");
      ++rows;
    }
    CHECK(rows == g.age_nodes() * g.length_nodes());
  }

  TEST_CASE("summary has one row per time level") {
    Scenario s = basic_scenario(2);
    s.initial = {constant(1.0), constant(0.5)};
    const Trajectory tr = run(s);
    const fs::path p = scratch("summary.csv");
    write_summary(tr, p);
    std::ifstream in(p);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "t,biomass_1,recruitment_1,total_1,exiting_1,biomass_2,recruitment_2,total_2,exiting_2");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == s.Nt + 1);
  }

  TEST_CASE("observations round-trip") {
    ObservationSeries obs{{0, 0.0, ObservationKind::biomass, 0, 1.0 / 3.0, 0.1},
                          {4, 0.4, ObservationKind::total, 1, 2.5e-17, 1.0}};
    const fs::path p = scratch("obs.csv");
    write_observations(obs, p);
    const auto back = read_observations(p);
    REQUIRE(back.size() == 2u);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(back[k].step == obs[k].step);
      CHECK(back[k].t == obs[k].t);
      CHECK(back[k].kind == obs[k].kind);
      CHECK(back[k].region == obs[k].region);
      CHECK(back[k].value == obs[k].value);
      CHECK(back[k].sd == obs[k].sd);
    }
    {
      std::ofstream out(p);
      out << "step,t,kind,region,value,sd\n1,0.1,weight,1,2,1\n";
    }
    CHECK_THROWS_AS(read_observations(p), ParseError);
  }

  TEST_CASE("manifest and hashing") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    RunManifest m;
    m.scenario_name = "x";
    m.version = kVersion;
    m.files = {"summary.csv"};
    const fs::path p = scratch("manifest.json");
    write_manifest(m, p);
    const std::string text = slurp(p);
    CHECK(text.find("\"summary.csv\"") != std::string::npos);
    CHECK(text.find(kVersion) != std::string::npos);
  }
}
