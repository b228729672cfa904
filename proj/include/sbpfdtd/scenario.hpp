#pragma once

// Scenario files: a versioned, sectioned key = value text format. The
// schema is documented in docs/scenario_format.md.

#include "sbpfdtd/diagnostics.hpp"
#include "sbpfdtd/error.hpp"
#include "sbpfdtd/grid.hpp"
#include "sbpfdtd/materials.hpp"
#include "sbpfdtd/sat.hpp"
#include "sbpfdtd/solver.hpp"
#include "sbpfdtd/sources.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace sbpfdtd {

inline constexpr std::string_view scenario_header = "sbpfdtd-scenario 1";

struct MaterialRegion {
  enum class Shape { Box, Cylinder } shape = Shape::Box;
  std::string name;
  BoxRegion box;
  CylinderRegion cylinder;
  MaterialValues values;
};

struct OutputRequest {
  long energy_stride = 0;               // 0 disables the energy trace
  std::vector<long> snapshot_steps;
  std::vector<Component> snapshot_components{Component::Ez};
  std::string snapshot_format = "vtk";  // vtk, csv or both
  bool spectrum = false;
  Window window = Window::Hann;
  bool remove_mean = true;
  bool sar = false;
  long progress = 0;                    // 0 disables progress lines
};

struct Scenario {
  GridSpec grid;
  std::array<BoundaryType, 6> boundary{};
  std::array<double, 3> phase{};
  long n_steps = 0;
  std::optional<double> dt;             // explicit time step
  double dt_factor = 0.99;              // used when dt is not given
  bool allow_unstable = false;
  std::vector<MaterialRegion> materials;
  std::string voxel_file;               // resolved path, empty if none
  std::vector<SourceSpec> sources;
  std::vector<ProbeSpec> probes;
  OutputRequest output;
  unsigned long seed = 0;
  double random_init = 0.0;             // amplitude of a random initial E field

  std::string source_text;              // the file as read
  std::string base_dir;

  MaterialGrid build_materials() const {
    MaterialGrid m(grid);
    for (const auto& r : materials) {
      if (r.shape == MaterialRegion::Shape::Box)
        paint_box(m, grid, r.box, r.values);
      else
        paint_cylinder(m, grid, r.cylinder, r.values);
    }
    if (!voxel_file.empty()) load_voxel_csv(m, voxel_file);
    return m;
  }

  SatConfig sat() const { return SatConfig::make(boundary, phase); }

  double resolved_dt(const MaterialGrid& m) const { return dt ? *dt : dt_factor * cfl_max_dt(grid, m); }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

inline std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long> to_long(const std::string& s) {
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Section {
  std::string name;
  int index = 0; // occurrence index among sections with the same name
  int line = 0;
  std::map<std::string, Entry> keys;
};

// Typed access to one section with error collection under a field path.
class Reader {
public:
  Reader(Section& s, std::vector<std::string>& errors) : s_(s), errors_(errors) {}

  std::string path(const std::string& key) const {
    const bool repeated = s_.name == "material" || s_.name == "source" || s_.name == "probe";
    return s_.name + (repeated ? "[" + std::to_string(s_.index) + "]" : "") + "." + key;
  }
  bool has(const std::string& key) const { return s_.keys.count(key) != 0; }

  std::optional<std::string> str(const std::string& key, bool required) {
    auto it = s_.keys.find(key);
    if (it == s_.keys.end()) {
      if (required) errors_.push_back(path(key) + ": required key missing");
      return std::nullopt;
    }
    it->second.used = true;
    return it->second.value;
  }

  template <class V, class Conv>
  std::optional<std::vector<V>> list(const std::string& key, std::size_t count, bool required, Conv conv, const char* what) {
    const auto s = str(key, required);
    if (!s) return std::nullopt;
    const auto toks = split_ws(*s);
    if (count != 0 && toks.size() != count) {
      errors_.push_back(path(key) + ": expected " + std::to_string(count) + " " + what + " values");
      return std::nullopt;
    }
    std::vector<V> out;
    for (const auto& t : toks) {
      const auto v = conv(t);
      if (!v) {
        errors_.push_back(path(key) + ": '" + t + "' is not a valid " + what);
        return std::nullopt;
      }
      out.push_back(*v);
    }
    return out;
  }

  std::optional<std::vector<double>> doubles(const std::string& key, std::size_t count, bool required) {
    return list<double>(key, count, required, to_double, "number");
  }
  std::optional<std::vector<long>> longs(const std::string& key, std::size_t count, bool required) {
    return list<long>(key, count, required, to_long, "integer");
  }
  std::optional<double> num(const std::string& key, bool required) {
    const auto v = doubles(key, 1, required);
    return v ? std::optional<double>((*v)[0]) : std::nullopt;
  }
  std::optional<long> integer(const std::string& key, bool required) {
    const auto v = longs(key, 1, required);
    return v ? std::optional<long>((*v)[0]) : std::nullopt;
  }
  std::optional<bool> flag(const std::string& key) {
    const auto s = str(key, false);
    if (!s) return std::nullopt;
    if (*s == "true" || *s == "yes" || *s == "1") return true;
    if (*s == "false" || *s == "no" || *s == "0") return false;
    errors_.push_back(path(key) + ": expected true or false");
    return std::nullopt;
  }
  template <class F>
  auto parsed(const std::string& key, bool required, F parse) -> std::optional<decltype(parse(std::string_view{}))> {
    const auto s = str(key, required);
    if (!s) return std::nullopt;
    try {
      return parse(*s);
    } catch (const Error& e) {
      errors_.push_back(path(key) + ": " + e.what());
      return std::nullopt;
    }
  }
  void error(const std::string& key, const std::string& msg) { errors_.push_back(path(key) + ": " + msg); }

  void report_unused() {
    for (const auto& [k, e] : s_.keys)
      if (!e.used) errors_.push_back("line " + std::to_string(e.line) + ": " + path(k) + ": unknown key");
  }

private:
  Section& s_;
  std::vector<std::string>& errors_;
};

inline int parse_axis(std::string_view s) {
  if (s == "x") return 0;
  if (s == "y") return 1;
  if (s == "z") return 2;
  throw ConfigError("axis must be x, y or z");
}

inline WaveformKind parse_waveform(std::string_view s) {
  if (s == "gaussian") return WaveformKind::Gaussian;
  if (s == "modulated_gaussian") return WaveformKind::ModulatedGaussian;
  if (s == "sinusoid") return WaveformKind::Sinusoid;
  throw ConfigError("waveform must be gaussian, modulated_gaussian or sinusoid");
}

} // namespace detail

struct ScenarioParseResult {
  std::optional<Scenario> scenario;
  std::vector<std::string> errors;
};

/// Parses and validates scenario text. All problems are collected: syntax
/// errors carry line numbers, semantic errors carry field paths.
inline ScenarioParseResult parse_scenario_text(const std::string& text, const std::string& base_dir = ".") {
  using namespace detail;
  ScenarioParseResult res;
  auto& errors = res.errors;

  std::vector<Section> sections;
  std::map<std::string, int> counts;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  bool header = false;
  const std::set<std::string> known{"grid", "boundary", "time", "material", "voxels", "source", "probe", "output", "init"};
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    if (!header) {
      if (line != scenario_header) {
        errors.push_back("line " + std::to_string(lineno) + ": expected header '" + std::string(scenario_header) + "'");
        return res;
      }
      header = true;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
        continue;
      }
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (!known.count(name)) {
        errors.push_back("line " + std::to_string(lineno) + ": unknown section [" + name + "]");
        sections.push_back({"", 0, lineno, {}});
        continue;
      }
      const int idx = counts[name]++;
      const bool repeatable = name == "material" || name == "source" || name == "probe";
      if (idx > 0 && !repeatable) errors.push_back("line " + std::to_string(lineno) + ": section [" + name + "] appears twice");
      sections.push_back({name, idx, lineno, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    if (sections.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": key outside of any section");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    auto& keys = sections.back().keys;
    if (keys.count(key)) {
      errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      continue;
    }
    keys[key] = {value, lineno, false};
  }
  if (!header) {
    errors.push_back("line 1: empty file, expected header '" + std::string(scenario_header) + "'");
    return res;
  }

  Scenario sc;
  sc.source_text = text;
  sc.base_dir = base_dir;
  auto find = [&](const std::string& n) -> Section* {
    for (auto& s : sections)
      if (s.name == n) return &s;
    return nullptr;
  };
  Section empty_section;

  // [grid]
  bool grid_ok = false;
  if (Section* s = find("grid")) {
    Reader r(*s, errors);
    const auto cells = r.longs("cells", 3, true);
    const auto sp = r.doubles("spacing", 3, true);
    if (cells && sp) {
      grid_ok = true;
      for (int a = 0; a < 3; ++a) {
        sc.grid.n[a] = static_cast<int>((*cells)[a]);
        sc.grid.h[a] = (*sp)[a];
        if ((*cells)[a] < 4) {
          r.error("cells", "grid too small for boundary closure (need at least 4 cells per axis)");
          grid_ok = false;
        }
        if (!((*sp)[a] > 0.0)) {
          r.error("spacing", "spacing must be positive");
          grid_ok = false;
        }
      }
    }
    r.report_unused();
  } else {
    errors.push_back("grid: section [grid] is required");
  }

  // [boundary]
  sc.boundary.fill(BoundaryType::PEC);
  if (Section* s = find("boundary")) {
    Reader r(*s, errors);
    if (const auto all = r.parsed("all", false, parse_boundary)) sc.boundary.fill(*all);
    for (Face f : all_faces)
      if (const auto b = r.parsed(std::string(face_name(f)), false, parse_boundary)) sc.boundary[static_cast<int>(f)] = *b;
    if (const auto ph = r.doubles("phase", 3, false))
      for (int a = 0; a < 3; ++a) sc.phase[a] = (*ph)[a];
    r.report_unused();
    try {
      sc.sat().validate(ScalarMode::Complex);
    } catch (const Error& e) {
      r.error("all", e.what());
    }
    for (int a = 0; a < 3; ++a)
      if (sc.phase[a] != 0.0 && sc.boundary[2 * a] != BoundaryType::Periodic)
        r.error("phase", "a Bloch phase needs periodic faces on that axis");
  }

  // [time]
  if (Section* s = find("time")) {
    Reader r(*s, errors);
    if (const auto n = r.integer("steps", true)) {
      if (*n < 0) r.error("steps", "must be non-negative");
      sc.n_steps = *n;
    }
    if (const auto dt = r.num("dt", false)) {
      if (!(*dt > 0.0)) r.error("dt", "must be positive");
      sc.dt = *dt;
    }
    if (const auto f = r.num("dt_factor", false)) {
      if (!(*f > 0.0)) r.error("dt_factor", "must be positive");
      if (sc.dt) r.error("dt_factor", "give either dt or dt_factor, not both");
      sc.dt_factor = *f;
    }
    if (const auto u = r.flag("allow_unstable")) sc.allow_unstable = *u;
    r.report_unused();
  } else {
    errors.push_back("time: section [time] is required");
  }

  // [material]
  for (auto& s : sections) {
    if (s.name != "material") continue;
    Reader r(s, errors);
    MaterialRegion m;
    if (const auto n = r.str("name", false)) m.name = *n;
    const auto shape = r.str("shape", true);
    if (shape && *shape == "box") {
      m.shape = MaterialRegion::Shape::Box;
      const auto lo = r.doubles("lo", 3, true), hi = r.doubles("hi", 3, true);
      if (lo && hi)
        for (int a = 0; a < 3; ++a) {
          m.box.lo[a] = (*lo)[a];
          m.box.hi[a] = (*hi)[a];
        }
    } else if (shape && *shape == "cylinder") {
      m.shape = MaterialRegion::Shape::Cylinder;
      if (const auto c = r.doubles("center", 2, true)) {
        m.cylinder.cx = (*c)[0];
        m.cylinder.cy = (*c)[1];
      }
      if (const auto v = r.num("radius", true)) m.cylinder.radius = *v;
      if (const auto v = r.num("z0", true)) m.cylinder.z0 = *v;
      if (const auto v = r.num("height", true)) m.cylinder.height = *v;
      if (m.cylinder.radius <= 0.0 || m.cylinder.height <= 0.0) r.error("radius", "radius and height must be positive");
    } else if (shape) {
      r.error("shape", "must be box or cylinder");
    }
    if (const auto v = r.num("eps_r", false)) m.values.eps_r = *v;
    if (const auto v = r.num("mu_r", false)) m.values.mu_r = *v;
    if (const auto v = r.num("sigma", false)) m.values.sigma = *v;
    if (const auto v = r.num("rho", false)) m.values.rho = *v;
    if (!(m.values.eps_r > 0.0)) r.error("eps_r", "must be positive");
    if (!(m.values.mu_r > 0.0)) r.error("mu_r", "must be positive");
    if (m.values.sigma < 0.0) r.error("sigma", "must be non-negative");
    if (m.values.rho < 0.0) r.error("rho", "must be non-negative");
    r.report_unused();
    sc.materials.push_back(m);
  }

  // [voxels]
  if (Section* s = find("voxels")) {
    Reader r(*s, errors);
    if (const auto f = r.str("file", true)) {
      std::filesystem::path p(*f);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      sc.voxel_file = p.string();
      if (!std::filesystem::exists(p)) r.error("file", "voxel file '" + sc.voxel_file + "' not found");
    }
    r.report_unused();
  }

  // [source]
  for (auto& s : sections) {
    if (s.name != "source") continue;
    Reader r(s, errors);
    SourceSpec src;
    if (const auto c = r.parsed("component", true, parse_component)) src.target.component = *c;
    if (r.has("node")) {
      if (const auto n = r.longs("node", 3, true))
        for (int a = 0; a < 3; ++a) src.target.lo[a] = src.target.hi[a] = static_cast<int>((*n)[a]);
    } else {
      const auto lo = r.longs("lo", 3, true), hi = r.longs("hi", 3, true);
      if (lo && hi)
        for (int a = 0; a < 3; ++a) {
          src.target.lo[a] = static_cast<int>((*lo)[a]);
          src.target.hi[a] = static_cast<int>((*hi)[a]);
        }
    }
    if (const auto w = r.parsed("waveform", true, parse_waveform)) src.waveform.kind = *w;
    if (const auto v = r.num("t_w", src.waveform.kind != WaveformKind::Sinusoid)) src.waveform.t_w = *v;
    if (const auto v = r.num("t_0", src.waveform.kind != WaveformKind::Sinusoid)) src.waveform.t_0 = *v;
    if (const auto v = r.num("frequency", src.waveform.kind != WaveformKind::Gaussian)) src.waveform.freq = *v;
    if (const auto v = r.num("amplitude", false)) src.amplitude = *v;
    r.report_unused();
    if (grid_ok) {
      try {
        src.validate(sc.grid);
      } catch (const Error& e) {
        r.error("node", e.what());
      }
    }
    sc.sources.push_back(src);
  }

  // [probe]
  for (auto& s : sections) {
    if (s.name != "probe") continue;
    Reader r(s, errors);
    ProbeSpec p;
    p.name = "probe" + std::to_string(s.index);
    if (const auto n = r.str("name", false)) p.name = *n;
    const auto kind = r.str("kind", true);
    if (kind && *kind == "point") {
      p.kind = ProbeKind::PointField;
      if (const auto c = r.parsed("component", true, parse_component)) p.component = *c;
      if (const auto n = r.longs("node", 3, true))
        for (int a = 0; a < 3; ++a) p.node[a] = static_cast<int>((*n)[a]);
    } else if (kind && *kind == "plane") {
      p.kind = ProbeKind::PlaneFlux;
      if (const auto a = r.parsed("axis", true, parse_axis)) p.axis = *a;
      if (const auto v = r.integer("position", true)) p.position = static_cast<int>(*v);
      if (const auto e = r.longs("extent", 4, false))
        for (int q = 0; q < 4; ++q) p.extent[q] = static_cast<int>((*e)[q]);
    } else if (kind) {
      r.error("kind", "must be point or plane");
    }
    if (const auto v = r.integer("stride", false)) p.stride = static_cast<int>(*v);
    r.report_unused();
    for (const auto& other : sc.probes)
      if (other.name == p.name) r.error("name", "duplicate probe name '" + p.name + "'");
    if (grid_ok) {
      try {
        p.validate(sc.grid);
      } catch (const Error& e) {
        r.error(p.kind == ProbeKind::PointField ? "node" : "position", e.what());
      }
    }
    sc.probes.push_back(p);
  }

  // [output]
  if (Section* s = find("output")) {
    Reader r(*s, errors);
    if (const auto v = r.integer("energy_stride", false)) {
      if (*v < 0) r.error("energy_stride", "must be non-negative");
      sc.output.energy_stride = *v;
    }
    if (const auto v = r.longs("snapshot_steps", 0, false)) sc.output.snapshot_steps = *v;
    if (const auto v = r.str("snapshot_components", false)) {
      sc.output.snapshot_components.clear();
      for (const auto& t : split_ws(*v)) {
        try {
          sc.output.snapshot_components.push_back(parse_component(t));
        } catch (const Error& e) {
          r.error("snapshot_components", e.what());
        }
      }
    }
    if (const auto v = r.str("snapshot_format", false)) {
      if (*v != "vtk" && *v != "csv" && *v != "both") r.error("snapshot_format", "must be vtk, csv or both");
      sc.output.snapshot_format = *v;
    }
    if (const auto v = r.flag("spectrum")) sc.output.spectrum = *v;
    if (const auto v = r.str("window", false)) {
      if (*v == "hann")
        sc.output.window = Window::Hann;
      else if (*v == "none")
        sc.output.window = Window::None;
      else
        r.error("window", "must be hann or none");
    }
    if (const auto v = r.flag("remove_mean")) sc.output.remove_mean = *v;
    if (const auto v = r.flag("sar")) sc.output.sar = *v;
    if (const auto v = r.integer("progress", false)) sc.output.progress = *v;
    r.report_unused();
  }

  // [init]
  if (Section* s = find("init")) {
    Reader r(*s, errors);
    if (const auto v = r.integer("seed", false)) sc.seed = static_cast<unsigned long>(*v);
    if (const auto v = r.num("random_amplitude", false)) sc.random_init = *v;
    r.report_unused();
  }

  // Cross-field checks that need materials and the resolved time step.
  if (grid_ok && errors.empty()) {
    try {
      const MaterialGrid m = sc.build_materials();
      m.validate();
      const double dt_max = cfl_max_dt(sc.grid, m);
      const double dt = sc.resolved_dt(m);
      if (dt > dt_max * (1.0 + 1e-12) && !sc.allow_unstable)
        errors.push_back(std::string(sc.dt ? "time.dt" : "time.dt_factor") + ": time step exceeds the CFL limit " +
                         std::to_string(dt_max) + " s (set allow_unstable = true to override)");
      if (sc.output.sar)
        for (std::size_t c = 0; c < m.size(); ++c)
          if (m.sigma_e[c] > 0.0 && !(m.rho[c] > 0.0)) {
            errors.push_back("output.sar: conductive cell " + std::to_string(c) + " has zero density");
            break;
          }
    } catch (const Error& e) {
      errors.push_back(std::string("materials: ") + e.what());
    }
  }

  if (errors.empty()) res.scenario = std::move(sc);
  return res;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Throws ConfigError listing every problem found.
inline Scenario parse_scenario(const std::string& path) {
  const std::string text = read_text_file(path);
  const auto dir = std::filesystem::path(path).parent_path();
  auto res = parse_scenario_text(text, dir.empty() ? "." : dir.string());
  if (!res.scenario) {
    std::string msg = path + ": invalid scenario";
    for (const auto& e : res.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return std::move(*res.scenario);
}

} // namespace sbpfdtd
