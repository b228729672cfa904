// Command-line front end: verify, simulate, dispersion, postprocess.
// Exit codes: 0 ok, 1 failed checks or runtime failure, 2 usage or input error.

#include "sbpfdtd/dispersion.hpp"
#include "sbpfdtd/io.hpp"
#include "sbpfdtd/run.hpp"
#include "sbpfdtd/scenario.hpp"
#include "sbpfdtd/verify.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

using namespace sbpfdtd;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_usage = 2;

std::string default_out_dir() {
  if (const char* e = std::getenv("SBPFDTD_OUTPUT_DIR"); e && *e) return e;
  return "sbpfdtd_out";
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  for (std::string t; std::getline(ss, t, ',');) {
    const auto v = detail::to_long(detail::trim(t));
    if (!v) throw ConfigError("'" + t + "' is not an integer");
    out.push_back(static_cast<int>(*v));
  }
  return out;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const std::string& sizes_arg, const std::string& perturb_arg) {
  const std::vector<int> sizes = parse_int_list(sizes_arg);
  const Perturbation p = parse_perturbation(perturb_arg);
  std::set<std::string> failed;
  auto note = [&](const CheckResult& r) {
    if (!r.passed()) failed.insert(r.invariant);
    return r.passed();
  };

  std::printf("SBP operators (tolerance %.0e)\n", SbpReport::tolerance);
  std::printf("%6s %12s %12s %12s %12s %12s  %s\n", "n", "identity", "D+ const", "D+ linear", "D- const", "D- linear", "status");
  for (int n : sizes) {
    const auto rs = check_sbp(n, p);
    bool ok = true;
    for (const auto& r : rs) ok = note(r) && ok;
    std::printf("%6d %12.3e %12.3e %12.3e %12.3e %12.3e  %s\n", n, rs[0].value, rs[1].value, rs[2].value, rs[3].value,
                rs[4].value, ok ? "PASS" : "FAIL");
  }

  std::printf("\nEnergy neutrality and oracle equivalence\n");
  for (int n : {4, 5}) {
    const GridSpec g = GridSpec::cubic(n, 0.1);
    for (BoundaryType b : {BoundaryType::PEC, BoundaryType::PMC, BoundaryType::Periodic}) {
      for (const CheckResult& r : {check_neutrality(g, b, p), check_oracle(g, b, p)}) {
        note(r);
        std::printf("%-20s %-14s %12.3e (tol %.0e)  %s\n", r.invariant.c_str(), r.detail.c_str(), r.value, r.tolerance,
                    r.passed() ? "PASS" : "FAIL");
      }
    }
  }

  if (failed.empty()) {
    std::printf("\nverify: PASS\n");
    return exit_ok;
  }
  std::string names;
  for (const auto& f : failed) names += (names.empty() ? "" : ", ") + f;
  std::printf("\nverify: FAIL (%s)\n", names.c_str());
  return exit_failed;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const std::string& file, const std::string& manifest_in, const std::string& out_dir, int threads,
                 std::optional<long> steps) {
  Scenario sc;
  RunOptions opt;
  if (!manifest_in.empty()) {
    auto [s, st] = scenario_from_manifest(manifest_in);
    sc = std::move(s);
    opt.steps_override = st;
  } else {
    sc = parse_scenario(file);
  }
  if (steps) opt.steps_override = steps;
  opt.out_dir = out_dir;
  opt.threads = threads;
  opt.progress = [](long n, long total) {
    std::fprintf(stderr, "step %ld/%ld (%.1f%%)\n", n, total, total > 0 ? 100.0 * static_cast<double>(n) / static_cast<double>(total) : 100.0);
  };
  std::filesystem::create_directories(out_dir);
  const std::string manifest_path = (std::filesystem::path(out_dir) / "manifest.json").string();
  try {
    const RunResult r = run(sc, opt);
    write_manifest(manifest_path, make_manifest(sc, opt, &r, ""));
    std::printf("simulate: %ld steps, dt = %s s, %zu files in %s (%.2f s)\n", r.n_steps, fmt(r.dt).c_str(), r.files.size(),
                out_dir.c_str(), r.wall_time);
    return exit_ok;
  } catch (const Error& e) {
    write_manifest(manifest_path, make_manifest(sc, opt, nullptr, e.what()));
    throw;
  }
}

// -------------------------------------------------------------- dispersion

struct DispersionArgs {
  std::string mode = "sweep";
  int cells = 8;
  double dt_factor = 0.99;
  double spacing = 0.01;
  std::string route = "reduced";
  long max_dim = default_dimension_cap;
  std::vector<double> sweep{1.0 / 40, 1.0 / 30, 1.0 / 20, 1.0 / 15, 1.0 / 10};
  double theta = 90.0, phi = 0.0;
  double resolution = 20.0; // cells per wavelength for the angle scan
  int n_theta = 10, n_phi = 10;
  std::string out;
};

int cmd_dispersion(const DispersionArgs& a) {
  if (a.cells < 4) throw ConfigError("--cells must be at least 4");
  if (!(a.dt_factor > 0.0)) throw ConfigError("--dt-factor must be positive");
  const EigenRoute route = a.route == "full" ? EigenRoute::Full : EigenRoute::Reduced;
  if (a.route != "full" && a.route != "reduced") throw ConfigError("--route must be full or reduced");
  const GridSpec g = GridSpec::cubic(a.cells, a.spacing);
  const double dt = a.dt_factor * cfl_max_dt(g, constants::c0);
  const double deg = constants::pi / 180.0;
  std::filesystem::create_directories(a.out);
  double worst = 0.0;

  if (a.mode == "sweep") {
    const std::string path = (std::filesystem::path(a.out) / "dispersion_sweep.csv").string();
    CsvWriter w(path, {"k0h_over_2pi", "dispersion", "dissipation", "global", "max_abs_lambda"});
    for (double r : a.sweep) {
      const double k0 = 2.0 * constants::pi * r / a.spacing;
      const DispersionResult d = analyze_direction(g, dt, k0, a.theta * deg, a.phi * deg, route, a.max_dim);
      worst = std::max(worst, d.max_abs_lambda);
      w.row({fmt(r), fmt(d.errors.dispersion), fmt(d.errors.dissipation), fmt(d.errors.global), fmt(d.max_abs_lambda)});
      std::printf("k0h/2pi = %-10.5g dispersion %.4e dissipation %.4e global %.4e\n", r, d.errors.dispersion,
                  d.errors.dissipation, d.errors.global);
    }
    w.close();
    std::printf("wrote %s\n", path.c_str());
  } else if (a.mode == "scan") {
    if (a.n_theta < 1 || a.n_phi < 1) throw ConfigError("--n-theta and --n-phi must be positive");
    std::vector<double> th, ph;
    for (int i = 0; i < a.n_theta; ++i) th.push_back(a.n_theta == 1 ? 0.0 : i * 90.0 / (a.n_theta - 1) * deg);
    for (int i = 0; i < a.n_phi; ++i) ph.push_back(a.n_phi == 1 ? 0.0 : i * 90.0 / (a.n_phi - 1) * deg);
    const double k0 = 2.0 * constants::pi / (a.resolution * a.spacing);
    const std::string path = (std::filesystem::path(a.out) / "dispersion_scan.csv").string();
    CsvWriter w(path, {"theta_deg", "phi_deg", "dispersion", "dissipation", "global", "max_abs_lambda"});
    for (double t : th)
      for (double p : ph) {
        const DispersionResult d = analyze_direction(g, dt, k0, t, p, route, a.max_dim);
        worst = std::max(worst, d.max_abs_lambda);
        w.row({fmt(t / deg), fmt(p / deg), fmt(d.errors.dispersion), fmt(d.errors.dissipation), fmt(d.errors.global),
               fmt(d.max_abs_lambda)});
      }
    w.close();
    std::printf("wrote %s (%zu rows)\n", path.c_str(), th.size() * ph.size());
  } else {
    throw ConfigError("--mode must be sweep or scan");
  }
  if (worst > 1.0 + 1e-9)
    std::fprintf(stderr, "warning: unstable time step, |lambda| reaches %.6f > 1 (dt factor %g)\n", worst, a.dt_factor);
  return exit_ok;
}

// ------------------------------------------------------------- postprocess

std::vector<std::complex<double>> complex_column(const CsvTable& t) {
  const auto re = t.values("re"), im = t.values("im");
  std::vector<std::complex<double>> out(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) out[i] = {re[i], im[i]};
  return out;
}

int cmd_post_spectrum(const std::string& in, const std::string& column, const std::string& window, bool remove_mean,
                      const std::string& out) {
  const CsvTable t = read_csv(in);
  const auto x = t.values(column);
  const auto time = t.values("time");
  if (time.size() < 2) throw ConfigError(in + ": need at least two samples");
  const double dt = time[1] - time[0];
  if (window != "hann" && window != "none") throw ConfigError("--window must be hann or none");
  const SpectrumResult s = spectrum(x, dt, 1, window == "hann" ? Window::Hann : Window::None, remove_mean);
  write_spectrum_csv(out, s.freq, s.amp);
  for (const auto& p : s.peaks) std::printf("peak %.9g Hz magnitude %.6g\n", p.frequency, p.magnitude);
  return exit_ok;
}

int cmd_post_sparams(const std::string& inc, const std::string& ref, const std::string& tra, double floor, const std::string& out) {
  const CsvTable ti = read_csv(inc), tr = read_csv(ref), tt = read_csv(tra);
  const auto freq = ti.values("frequency_hz");
  const SParameters s = s_parameters(freq, complex_column(ti), complex_column(tr), complex_column(tt), floor);
  write_sparams_csv(out, s);
  std::printf("wrote %s (%zu bins)\n", out.c_str(), freq.size());
  return exit_ok;
}

int cmd_post_sar(const std::string& emax, const std::string& scenario, const std::string& out) {
  const Scenario sc = parse_scenario(scenario);
  const MaterialGrid m = sc.build_materials();
  const CsvTable t = read_csv(emax);
  const auto i = t.values("i"), j = t.values("j"), k = t.values("k"), v = t.values("max_e2");
  std::vector<double> e2(m.size(), 0.0);
  for (std::size_t r = 0; r < v.size(); ++r) {
    const int ii = static_cast<int>(i[r]), jj = static_cast<int>(j[r]), kk = static_cast<int>(k[r]);
    if (ii < 0 || jj < 0 || kk < 0 || ii >= sc.grid.n[0] || jj >= sc.grid.n[1] || kk >= sc.grid.n[2])
      throw ConfigError(emax + ": cell index outside the scenario grid");
    e2[m.cell(ii, jj, kk)] = v[r];
  }
  const auto sar = point_sar(e2, m);
  write_cell_csv(out, sc.grid, sar, "sar");
  std::printf("max SAR %.6g W/kg\n", *std::max_element(sar.begin(), sar.end()));
  return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"SBP-SAT FDTD solver"};
  app.set_version_flag("--version", std::string(SBPFDTD_VERSION));
  app.require_subcommand(1);
  std::string out_dir = default_out_dir();

  auto* verify = app.add_subcommand("verify", "Run the operator, neutrality and oracle self-checks");
  std::string sizes = "4,8,16,32,64", perturb = "none";
  verify->add_option("--sizes", sizes, "Comma-separated cell counts for the operator checks");
  verify->add_option("--perturb", perturb, "Inject a fault: identity, neutrality or oracle");

  auto* sim = app.add_subcommand("simulate", "Run a scenario file");
  std::string scn, manifest_in;
  int threads = 1;
  long steps = -1;
  sim->add_option("scenario", scn, "Scenario file");
  sim->add_option("--manifest", manifest_in, "Re-run the scenario echoed in a manifest");
  sim->add_option("--threads", threads, "Worker threads for the field updates")->check(CLI::PositiveNumber);
  sim->add_option("--steps", steps, "Override the step count");
  sim->add_option("--out", out_dir, "Output directory (default $SBPFDTD_OUTPUT_DIR or ./sbpfdtd_out)");

  auto* disp = app.add_subcommand("dispersion", "Numerical dispersion from amplification eigenvalues");
  DispersionArgs da;
  disp->add_option("--mode", da.mode, "sweep (k0 h / 2 pi values) or scan (angles)");
  disp->add_option("--cells", da.cells, "Cells per axis of the periodic unit cell");
  disp->add_option("--dt-factor", da.dt_factor, "Time step as a fraction of the CFL limit");
  disp->add_option("--route", da.route, "Eigen route: reduced or full");
  disp->add_option("--max-dim", da.max_dim, "Dimension cap for the eigen-solve");
  disp->add_option("--sweep", da.sweep, "k0 h / 2 pi values for the sweep")->delimiter(',');
  disp->add_option("--theta", da.theta, "Sweep direction polar angle, degrees");
  disp->add_option("--phi", da.phi, "Sweep direction azimuth, degrees");
  disp->add_option("--resolution", da.resolution, "Cells per wavelength for the scan");
  disp->add_option("--n-theta", da.n_theta, "Scan points in theta over [0, 90] degrees");
  disp->add_option("--n-phi", da.n_phi, "Scan points in phi over [0, 90] degrees");
  disp->add_option("--out", out_dir, "Output directory");

  auto* post = app.add_subcommand("postprocess", "Spectra, S-parameters and SAR from CSV outputs");
  post->require_subcommand(1);
  auto* ps = post->add_subcommand("spectrum", "Spectrum of a probe CSV");
  std::string in_csv, column = "value", window = "hann", out_file;
  bool remove_mean = false;
  ps->add_option("--input", in_csv, "Probe CSV (step,time,value)")->required();
  ps->add_option("--column", column, "Column to transform");
  ps->add_option("--window", window, "hann or none");
  ps->add_flag("--remove-mean", remove_mean, "Subtract the mean first");
  ps->add_option("--out", out_file, "Output CSV")->required();
  auto* pp = post->add_subcommand("sparams", "S11 and S21 from plane power CSVs");
  std::string inc, ref, tra;
  double floor = 1e-6;
  pp->add_option("--incident", inc, "Incident power CSV")->required();
  pp->add_option("--reflected", ref, "Reflected power CSV")->required();
  pp->add_option("--transmitted", tra, "Transmitted power CSV")->required();
  pp->add_option("--floor", floor, "Relative floor below which incident bins are masked");
  pp->add_option("--out", out_file, "Output CSV")->required();
  auto* pz = post->add_subcommand("sar", "SAR from per-cell |E|^2 maxima and scenario materials");
  std::string emax, sar_scn;
  pz->add_option("--emax", emax, "emax2.csv from a simulate run")->required();
  pz->add_option("--scenario", sar_scn, "Scenario defining the materials")->required();
  pz->add_option("--out", out_file, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*verify) return cmd_verify(sizes, perturb);
    if (*sim) {
      if (scn.empty() == manifest_in.empty()) {
        std::fprintf(stderr, "simulate: give exactly one of a scenario file or --manifest\n");
        return exit_usage;
      }
      return cmd_simulate(scn, manifest_in, out_dir, threads, steps >= 0 ? std::optional<long>(steps) : std::nullopt);
    }
    if (*disp) {
      da.out = out_dir;
      return cmd_dispersion(da);
    }
    if (*ps) return cmd_post_spectrum(in_csv, column, window, remove_mean, out_file);
    if (*pp) return cmd_post_sparams(inc, ref, tra, floor, out_file);
    if (*pz) return cmd_post_sar(emax, sar_scn, out_file);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_usage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_failed;
  }
  return exit_usage;
}
