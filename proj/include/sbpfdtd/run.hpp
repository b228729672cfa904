#pragma once

// Executes a scenario: time loop with probes, energy trace, plane
// recorders, SAR maxima and snapshots, then writes outputs and a manifest.

#include "sbpfdtd/diagnostics.hpp"
#include "sbpfdtd/io.hpp"
#include "sbpfdtd/scenario.hpp"
#include "sbpfdtd/solver.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <complex>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#ifndef SBPFDTD_VERSION
#define SBPFDTD_VERSION "unknown"
#endif

namespace sbpfdtd {

struct RunOptions {
  std::string out_dir = ".";
  int threads = 1;
  std::optional<long> steps_override;
  bool write_files = true;
  std::function<void(long step, long total)> progress; // called every output.progress steps
};

struct RunResult {
  double dt = 0.0;
  double dt_max = 0.0;
  long n_steps = 0;
  std::vector<EnergySample> energy;
  std::vector<ProbeTrace> probes;
  std::vector<PlaneRecord> planes;
  std::vector<std::string> plane_names;
  std::vector<double> max_e2;  // empty unless SAR was requested
  std::vector<double> sar;
  std::vector<std::string> files;
  double wall_time = 0.0;
  std::size_t memory_estimate = 0;
};

namespace detail {

template <class T>
double real_part(const T& v) {
  if constexpr (std::is_same_v<T, double>)
    return v;
  else
    return v.real();
}

template <class T>
void random_fill(FieldSet<T>& f, unsigned long seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  for (int a = 0; a < 3; ++a)
    for (auto& v : f[electric(a)].data) v = u(rng);
}

inline nlohmann::json resolved_json(const Scenario& sc, double dt, double dt_max, long n_steps) {
  nlohmann::json j;
  j["grid"] = {{"cells", {sc.grid.n[0], sc.grid.n[1], sc.grid.n[2]}}, {"spacing", {sc.grid.h[0], sc.grid.h[1], sc.grid.h[2]}}};
  nlohmann::json b;
  for (Face f : all_faces) b[std::string(face_name(f))] = std::string(boundary_name(sc.boundary[static_cast<int>(f)]));
  j["boundary"] = b;
  j["phase"] = sc.phase;
  j["dt"] = dt;
  j["dt_max"] = dt_max;
  j["steps"] = n_steps;
  j["materials"] = sc.materials.size();
  j["voxel_file"] = sc.voxel_file;
  j["sources"] = sc.sources.size();
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& p : sc.probes) probes.push_back(p.name);
  j["probes"] = probes;
  j["seed"] = sc.seed;
  return j;
}

template <class T>
RunResult run_impl(const Scenario& sc, const RunOptions& opt) {
  const auto t_start = std::chrono::steady_clock::now();
  RunResult res;
  const MaterialGrid m = sc.build_materials();
  res.dt_max = cfl_max_dt(sc.grid, m);
  res.dt = sc.resolved_dt(m);
  res.n_steps = opt.steps_override ? *opt.steps_override : sc.n_steps;
  if (res.n_steps < 0) throw ConfigError("step count must be non-negative");

  Solver<T> solver(sc.grid, m, sc.sat(), res.dt, SolverOptions{opt.threads});
  for (const auto& s : sc.sources) solver.add_source(s);
  auto& f = solver.fields();
  if (sc.random_init != 0.0) random_fill(f, sc.seed, sc.random_init);

  const EnergyMonitor monitor(solver);
  FieldSet<T> h_prev(sc.grid);
  const long estride = sc.output.energy_stride;

  std::vector<const ProbeSpec*> point_specs;
  std::vector<PlaneRecorder> recorders;
  for (const auto& p : sc.probes) {
    if (p.kind == ProbeKind::PointField) {
      point_specs.push_back(&p);
      res.probes.push_back({p.name, p.component, {}, {}, {}});
    } else {
      if constexpr (!std::is_same_v<T, double>)
        throw ConfigError("probe '" + p.name + "': plane probes need real fields (zero Bloch phase)");
      recorders.emplace_back(sc.grid, p);
      res.plane_names.push_back(p.name);
    }
  }
  std::optional<SarTracker> sar;
  if (sc.output.sar) sar.emplace(sc.grid);

  const std::filesystem::path out(opt.out_dir);
  if (opt.write_files) std::filesystem::create_directories(out);
  auto snapshot = [&](long step) {
    if (!opt.write_files) return;
    for (Component c : sc.output.snapshot_components) {
      const std::string stem = "snapshot_" + std::string(component_name(c)) + "_" + std::to_string(step);
      if (sc.output.snapshot_format != "csv") {
        write_vtk((out / (stem + ".vtk")).string(), f[c], c, sc.grid, step);
        res.files.push_back(stem + ".vtk");
      }
      if (sc.output.snapshot_format != "vtk") {
        write_field_csv((out / (stem + ".csv")).string(), f[c]);
        res.files.push_back(stem + ".csv");
      }
    }
  };
  auto wants_snapshot = [&](long step) {
    return std::find(sc.output.snapshot_steps.begin(), sc.output.snapshot_steps.end(), step) != sc.output.snapshot_steps.end();
  };

  for (long n = 0; n < res.n_steps; ++n) {
    if (wants_snapshot(n)) snapshot(n);
    const bool energy_now = estride > 0 && n % estride == 0;
    if (energy_now)
      for (int b = 0; b < 3; ++b) h_prev[magnetic(b)].data = f[magnetic(b)].data;
    solver.update_h();
    // State here: E at step n, H at n + 1/2.
    if constexpr (std::is_same_v<T, double>)
      for (auto& r : recorders) r.capture(f, n);
    if (energy_now) res.energy.push_back({n, n * res.dt, monitor(f, h_prev)});
    for (std::size_t q = 0; q < point_specs.size(); ++q) {
      const ProbeSpec& p = *point_specs[q];
      if (n % p.stride != 0) continue;
      auto& tr = res.probes[q];
      tr.steps.push_back(n);
      tr.times.push_back(is_electric(p.component) ? n * res.dt : (n + 0.5) * res.dt);
      tr.values.push_back(real_part(f[p.component](p.node[0], p.node[1], p.node[2])));
    }
    if (sar) sar->update(f);
    solver.update_e((n + 0.5) * res.dt);
    solver.set_step_count(n + 1);
    if (opt.progress && sc.output.progress > 0 && (n + 1) % sc.output.progress == 0) opt.progress(n + 1, res.n_steps);
  }
  if (wants_snapshot(res.n_steps)) snapshot(res.n_steps);

  for (const auto& r : recorders) res.planes.push_back(r.record());
  if (sar) {
    res.max_e2 = sar->max_e2();
    res.sar = point_sar(res.max_e2, m);
  }

  res.memory_estimate = f.total_size() * sizeof(T) + f.total_size() * 2 * sizeof(double);
  if (estride > 0) res.memory_estimate += f.total_size() * sizeof(T);

  if (opt.write_files) {
    if (estride > 0) {
      write_energy_csv((out / "energy.csv").string(), res.energy);
      res.files.push_back("energy.csv");
    }
    for (const auto& tr : res.probes) {
      const std::string name = "probe_" + tr.name + ".csv";
      write_probe_csv((out / name).string(), tr);
      res.files.push_back(name);
      if (sc.output.spectrum && tr.values.size() >= 2) {
        const auto* spec = point_specs[static_cast<std::size_t>(&tr - res.probes.data())];
        const SpectrumResult s = spectrum(tr.values, res.dt, spec->stride, sc.output.window, sc.output.remove_mean);
        write_spectrum_csv((out / ("spectrum_" + tr.name + ".csv")).string(), s.freq, s.amp);
        write_peaks_csv((out / ("peaks_" + tr.name + ".csv")).string(), s.peaks);
        res.files.push_back("spectrum_" + tr.name + ".csv");
        res.files.push_back("peaks_" + tr.name + ".csv");
      }
    }
    for (std::size_t q = 0; q < res.planes.size(); ++q) {
      if (res.planes[q].samples() < 2) continue;
      const PowerSpectrum p = plane_power(res.planes[q], res.dt);
      const std::string name = "power_" + res.plane_names[q] + ".csv";
      write_spectrum_csv((out / name).string(), p.freq, p.power);
      res.files.push_back(name);
    }
    if (sar) {
      write_cell_csv((out / "emax2.csv").string(), sc.grid, res.max_e2, "max_e2");
      write_cell_csv((out / "sar.csv").string(), sc.grid, res.sar, "sar");
      res.files.push_back("emax2.csv");
      res.files.push_back("sar.csv");
    }
  }
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

} // namespace detail

/// Runs in complex arithmetic when a Bloch phase is set, real otherwise.
inline RunResult run(const Scenario& sc, const RunOptions& opt = {}) {
  return sc.sat().needs_complex() ? detail::run_impl<std::complex<double>>(sc, opt) : detail::run_impl<double>(sc, opt);
}

/// Manifest for a run. `result` is null when the run failed before
/// producing anything; `error` is non-empty for partial runs.
inline nlohmann::json make_manifest(const Scenario& sc, const RunOptions& opt, const RunResult* result, const std::string& error) {
  nlohmann::json j;
  j["format"] = "sbpfdtd-manifest 1";
  j["version"] = SBPFDTD_VERSION;
  j["scenario_text"] = sc.source_text;
  j["base_dir"] = sc.base_dir;
  if (opt.steps_override) j["steps_override"] = *opt.steps_override;
  if (result) {
    j["resolved"] = detail::resolved_json(sc, result->dt, result->dt_max, result->n_steps);
    j["wall_time_s"] = result->wall_time;
    j["memory_estimate_bytes"] = result->memory_estimate;
    j["outputs"] = result->files;
  } else {
    j["outputs"] = nlohmann::json::array();
  }
  j["partial"] = !error.empty();
  if (!error.empty()) j["error"] = error;
  return j;
}

inline void write_manifest(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error("write to '" + path + "' failed");
}

/// Rebuilds the scenario and options echoed in a manifest.
inline std::pair<Scenario, std::optional<long>> scenario_from_manifest(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (j.value("format", "") != "sbpfdtd-manifest 1") throw ConfigError(path + ": not a run manifest");
  auto res = parse_scenario_text(j.at("scenario_text").get<std::string>(), j.value("base_dir", "."));
  if (!res.scenario) {
    std::string msg = path + ": echoed scenario is invalid";
    for (const auto& e : res.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  std::optional<long> steps;
  if (j.contains("steps_override")) steps = j["steps_override"].get<long>();
  return {std::move(*res.scenario), steps};
}

} // namespace sbpfdtd
