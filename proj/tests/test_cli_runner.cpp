#include "catch_amalgamated.hpp"

#include "sbpfdtd/io.hpp"
#include "sbpfdtd/run.hpp"
#include "sbpfdtd/scenario.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace sbpfdtd;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir(const std::string& name) {
  const char* env = std::getenv("SBPFDTD_TEST_TMP");
  fs::path p = env ? fs::path(env) : fs::temp_directory_path() / "sbpfdtd_tests";
  p /= name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const std::string small = R"(sbpfdtd-scenario 1
[grid]
cells = 6 5 4
spacing = 0.01 0.01 0.01
[boundary]
all = pec
[time]
steps = 40
[material]
shape = box
lo = 0 0 0
hi = 0.03 0.05 0.04
eps_r = 2.5
[source]
component = Ez
node = 2 2 2
waveform = modulated_gaussian
t_w = 2e-11
t_0 = 4e-11
frequency = 10e9
[probe]
name = ez
kind = point
component = Ez
node = 3 3 2
[probe]
name = hy
kind = point
component = Hy
node = 3 3 2
stride = 2
[output]
energy_stride = 5
snapshot_steps = 0 40
snapshot_components = Ez Hx
snapshot_format = both
)";

ScenarioParseResult parse(const std::string& text) { return parse_scenario_text(text, "."); }

std::string joined(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& e : v) s += e + "\n";
  return s;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto p = s.find(from);
  REQUIRE(p != std::string::npos);
  return s.replace(p, from.size(), to);
}

} // namespace

TEST_CASE("bundled cavity scenario parses", "[scenario]") {
  const Scenario sc = parse_scenario(std::string(SBPFDTD_SCENARIO_DIR) + "/cavity.scn");
  REQUIRE(sc.grid == GridSpec::cubic(25, 0.04));
  for (BoundaryType b : sc.boundary) REQUIRE(b == BoundaryType::PEC);
  REQUIRE(sc.n_steps == 32768);
  REQUIRE(sc.dt_factor == 0.99);
  REQUIRE(sc.sources.size() == 1);
  REQUIRE(sc.sources[0].target.component == Component::Ez);
  REQUIRE(sc.probes.size() == 1);
  REQUIRE(sc.probes[0].name == "ez");
  REQUIRE(sc.output.spectrum);
  const MaterialGrid m = sc.build_materials();
  REQUIRE_THAT(sc.resolved_dt(m), WithinRel(0.99 * 0.04 / (constants::c0 * std::sqrt(3.0)), 1e-14));
}

TEST_CASE("bundled resonator scenarios parse", "[scenario]") {
  for (const char* name : {"dr_resonator_20.scn", "dr_resonator_26.scn"}) {
    const Scenario sc = parse_scenario(std::string(SBPFDTD_SCENARIO_DIR) + "/" + name);
    REQUIRE(sc.materials.size() == 1);
    REQUIRE(sc.materials[0].values.eps_r == 38.0);
    REQUIRE(sc.sources.size() == 3);
  }
}

TEST_CASE("time step above the CFL limit is rejected", "[scenario]") {
  auto r = parse(replace(small, "steps = 40", "steps = 40\ndt_factor = 1.5"));
  REQUIRE_FALSE(r.scenario);
  REQUIRE_THAT(joined(r.errors), ContainsSubstring("time.dt_factor: time step exceeds the CFL limit"));
  r = parse(replace(small, "steps = 40", "steps = 40\ndt_factor = 1.5\nallow_unstable = true"));
  REQUIRE(r.scenario);
}

TEST_CASE("empty and headerless files", "[scenario]") {
  auto r = parse("");
  REQUIRE(r.errors.size() == 1);
  REQUIRE_THAT(r.errors[0], ContainsSubstring("line 1: empty file"));
  r = parse("# only a comment\n\n");
  REQUIRE_THAT(r.errors[0], ContainsSubstring("line 1: empty file"));
  r = parse("\n[grid]\n");
  REQUIRE_THAT(r.errors[0], ContainsSubstring("line 2: expected header 'sbpfdtd-scenario 1'"));
}

TEST_CASE("all errors are collected with their field paths", "[scenario]") {
  std::string text = replace(small, "component = Ez\nnode = 2 2 2", "component = Hz\nnode = 2 2 2");
  text = replace(text, "name = hy", "name = hy\ncolour = red");
  text = replace(text, "eps_r = 2.5", "eps_r = -1");
  text = replace(text, "steps = 40", "steps = -3");
  const auto r = parse(text);
  REQUIRE_FALSE(r.scenario);
  const std::string all = joined(r.errors);
  REQUIRE_THAT(all, ContainsSubstring("source[0].node"));
  REQUIRE_THAT(all, ContainsSubstring("must drive an electric component"));
  REQUIRE_THAT(all, ContainsSubstring("probe[1].colour"));
  REQUIRE_THAT(all, ContainsSubstring("material[0].eps_r"));
  REQUIRE_THAT(all, ContainsSubstring("time.steps"));
  REQUIRE(r.errors.size() >= 4);
  REQUIRE_THROWS_AS(parse_scenario("/nonexistent/x.scn"), ConfigError);
}

TEST_CASE("structural errors carry line numbers", "[scenario]") {
  auto r = parse("sbpfdtd-scenario 1\n[grid]\ncells = 4 4 4\ncells = 5 5 5\n[nope]\nx\n");
  const std::string all = joined(r.errors);
  REQUIRE_THAT(all, ContainsSubstring("line 4: duplicate key 'cells'"));
  REQUIRE_THAT(all, ContainsSubstring("line 5: unknown section [nope]"));
  REQUIRE_THAT(all, ContainsSubstring("line 6: expected 'key = value'"));
  REQUIRE_THAT(all, ContainsSubstring("grid.spacing"));
  REQUIRE_THAT(all, ContainsSubstring("time: section [time] is required"));
}

TEST_CASE("grids below the closure size are rejected", "[scenario]") {
  const auto r = parse(replace(small, "cells = 6 5 4", "cells = 6 3 4"));
  REQUIRE_THAT(joined(r.errors), ContainsSubstring("grid too small for boundary closure"));
}

TEST_CASE("Bloch phases need periodic axes", "[scenario]") {
  auto r = parse(replace(small, "all = pec", "all = pec\nphase = 0.5 0 0"));
  REQUIRE_THAT(joined(r.errors), ContainsSubstring("boundary.phase"));
  r = parse(replace(small, "all = pec", "all = pec\nx_low = periodic"));
  REQUIRE_THAT(joined(r.errors), ContainsSubstring("needs both opposing faces periodic"));
}

TEST_CASE("SAR output needs a density in conductive cells", "[scenario]") {
  std::string text = replace(small, "eps_r = 2.5", "eps_r = 2.5\nsigma = 0.5");
  text = replace(text, "energy_stride = 5", "energy_stride = 5\nsar = true");
  REQUIRE_THAT(joined(parse(text).errors), ContainsSubstring("output.sar: conductive cell"));
  REQUIRE(parse(replace(text, "sigma = 0.5", "sigma = 0.5\nrho = 1000")).scenario);
}

TEST_CASE("zero steps give empty traces", "[runner]") {
  const auto r = parse(replace(small, "steps = 40", "steps = 0"));
  REQUIRE(r.scenario);
  const auto dir = tmp_dir("zero");
  RunOptions opt;
  opt.out_dir = dir.string();
  const RunResult res = run(*r.scenario, opt);
  REQUIRE(res.n_steps == 0);
  REQUIRE(res.energy.empty());
  REQUIRE(res.probes.size() == 2);
  REQUIRE(res.probes[0].values.empty());
  const CsvTable t = read_csv((dir / "probe_ez.csv").string());
  REQUIRE(t.header == std::vector<std::string>{"step", "time", "value"});
  REQUIRE(t.rows.empty());
  REQUIRE(fs::exists(dir / "snapshot_Ez_0.vtk"));
}

TEST_CASE("run writes the requested outputs", "[runner]") {
  const auto r = parse(small);
  REQUIRE(r.scenario);
  const auto dir = tmp_dir("outputs");
  RunOptions opt;
  opt.out_dir = dir.string();
  const RunResult res = run(*r.scenario, opt);
  REQUIRE(res.energy.size() == 8);
  REQUIRE(res.probes[0].values.size() == 40);
  REQUIRE(res.probes[1].values.size() == 20);
  REQUIRE_THAT(res.probes[1].times[1], WithinRel(2.5 * res.dt, 1e-14));
  for (const char* f : {"energy.csv", "probe_ez.csv", "probe_hy.csv", "snapshot_Ez_0.vtk", "snapshot_Ez_40.csv",
                        "snapshot_Hx_40.vtk"})
    REQUIRE(fs::exists(dir / f));
  const CsvTable e = read_csv((dir / "energy.csv").string());
  REQUIRE(e.header == std::vector<std::string>{"step", "time", "total", "Ex", "Ey", "Ez", "Hx", "Hy", "Hz"});
  REQUIRE(e.values("step") == std::vector<double>{0, 5, 10, 15, 20, 25, 30, 35});
  const CsvTable p = read_csv((dir / "probe_ez.csv").string());
  const auto v = p.values("value");
  for (std::size_t i = 0; i < v.size(); ++i) REQUIRE(v[i] == res.probes[0].values[i]);
}

TEST_CASE("VTK snapshot header", "[runner][io]") {
  const GridSpec g{{4, 5, 6}, {0.5, 0.25, 0.125}};
  Field<double> f(layout_for(g, Component::Ex));
  f(1, 2, 3) = 0.1;
  const auto dir = tmp_dir("vtk");
  const std::string path = (dir / "ex.vtk").string();
  write_vtk(path, f, Component::Ex, g, 12);
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines[0] == "# vtk DataFile Version 3.0");
  REQUIRE(lines[1] == "sbpfdtd Ex step 12");
  REQUIRE(lines[3] == "DATASET STRUCTURED_POINTS");
  REQUIRE(lines[4] == "DIMENSIONS 6 6 7");
  REQUIRE(lines[5] == "ORIGIN -0.25 0 0");
  REQUIRE(lines[6] == "SPACING 0.5 0.25 0.125");
  REQUIRE(lines[7] == "POINT_DATA 252");
  REQUIRE(lines.size() == 10 + 252);
  REQUIRE(lines[10 + f.layout.index(1, 2, 3)] == "0.1");
}

TEST_CASE("number formatting round-trips", "[io][property]") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, 1e-12}) {
    const std::string s = fmt(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    REQUIRE(back == v);
  }
  REQUIRE(fmt(std::numeric_limits<double>::quiet_NaN()) == "nan");
  REQUIRE(fmt(std::numeric_limits<double>::infinity()) == "inf");
  REQUIRE(fmt(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("S-parameter CSV carries dB columns", "[io]") {
  SParameters s;
  s.freq = {1e9, 2e9};
  s.s11 = {0.1, std::numeric_limits<double>::quiet_NaN()};
  s.s21 = {1.0, std::numeric_limits<double>::quiet_NaN()};
  s.valid = {true, false};
  const auto dir = tmp_dir("sparams");
  write_sparams_csv((dir / "s.csv").string(), s);
  const CsvTable t = read_csv((dir / "s.csv").string());
  REQUIRE(t.header == std::vector<std::string>{"frequency_hz", "s11", "s21", "s11_db", "s21_db"});
  REQUIRE_THAT(t.values("s11_db")[0], WithinRel(-10.0, 1e-14));
  REQUIRE(t.values("s21_db")[0] == 0.0);
  REQUIRE(std::isnan(t.values("s11_db")[1]));
  REQUIRE_THROWS_AS(t.column("s12"), ConfigError);
}

TEST_CASE("manifest replay reproduces the run bit for bit", "[runner][manifest]") {
  const std::string text = replace(small, "[output]", "[init]\nseed = 17\nrandom_amplitude = 0.3\n[output]");
  const auto r = parse(text);
  REQUIRE(r.scenario);
  const auto dir = tmp_dir("manifest");
  RunOptions opt;
  opt.out_dir = (dir / "a").string();
  opt.steps_override = 25;
  const RunResult first = run(*r.scenario, opt);
  const auto j = make_manifest(*r.scenario, opt, &first, "");
  REQUIRE(j["resolved"]["steps"] == 25);
  REQUIRE(j["resolved"]["seed"] == 17);
  REQUIRE(j["partial"] == false);
  REQUIRE(j["outputs"].size() == first.files.size());
  write_manifest((dir / "manifest.json").string(), j);

  const auto [sc2, steps] = scenario_from_manifest((dir / "manifest.json").string());
  REQUIRE(steps == 25);
  RunOptions opt2;
  opt2.out_dir = (dir / "b").string();
  opt2.steps_override = steps;
  const RunResult second = run(sc2, opt2);
  REQUIRE(second.dt == first.dt);
  for (std::size_t q = 0; q < first.probes.size(); ++q) REQUIRE(second.probes[q].values == first.probes[q].values);
  for (std::size_t n = 0; n < first.energy.size(); ++n) REQUIRE(second.energy[n].report.total == first.energy[n].report.total);
}

TEST_CASE("failed runs produce a partial manifest", "[runner][manifest]") {
  const auto r = parse(small);
  const auto j = make_manifest(*r.scenario, RunOptions{}, nullptr, "disk full");
  REQUIRE(j["partial"] == true);
  REQUIRE(j["error"] == "disk full");
  REQUIRE(j["outputs"].empty());
  const auto dir = tmp_dir("bad_manifest");
  {
    std::ofstream out(dir / "m.json");
    out << R"({"format": "something else"})";
  }
  REQUIRE_THROWS_WITH(scenario_from_manifest((dir / "m.json").string()), ContainsSubstring("not a run manifest"));
}

TEST_CASE("plane probes need real fields", "[runner]") {
  std::string text = replace(small, "all = pec", "all = periodic\nphase = 0.2 0 0");
  text = replace(text, "[output]", "[probe]\nname = flux\nkind = plane\naxis = z\nposition = 2\n[output]");
  const auto r = parse(text);
  REQUIRE(r.scenario);
  RunOptions opt;
  opt.write_files = false;
  REQUIRE_THROWS_WITH(run(*r.scenario, opt), ContainsSubstring("plane probes need real fields"));
}

TEST_CASE("SAR maps are written for lossy runs", "[runner]") {
  std::string text = replace(small, "eps_r = 2.5", "eps_r = 2.5\nsigma = 0.5\nrho = 1000");
  text = replace(text, "energy_stride = 5", "energy_stride = 5\nsar = true");
  const auto r = parse(text);
  REQUIRE(r.scenario);
  const auto dir = tmp_dir("sar");
  RunOptions opt;
  opt.out_dir = dir.string();
  const RunResult res = run(*r.scenario, opt);
  REQUIRE(res.sar.size() == r.scenario->grid.cell_count());
  const CsvTable t = read_csv((dir / "sar.csv").string());
  REQUIRE(t.header == std::vector<std::string>{"i", "j", "k", "sar"});
  REQUIRE(t.rows.size() == res.sar.size());
  const MaterialGrid m = r.scenario->build_materials();
  std::size_t lossy = 0;
  for (std::size_t c = 0; c < res.sar.size(); ++c) {
    REQUIRE(res.sar[c] == (m.sigma_e[c] > 0.0 ? 0.5 * res.max_e2[c] / 2000.0 : 0.0));
    lossy += m.sigma_e[c] > 0.0;
  }
  REQUIRE(lossy == 3 * 5 * 4);
}
