#include "catch_amalgamated.hpp"

#include "sbpfdtd/dispersion.hpp"

#include <algorithm>

using namespace sbpfdtd;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = constants::pi;

double max_unit_deviation(const std::vector<cplx>& l) {
  double d = 0.0;
  for (const cplx& x : l) d = std::max(d, std::abs(std::abs(x) - 1.0));
  return d;
}

// Greedy nearest matching between two eigenvalue lists.
double spectrum_distance(std::vector<cplx> a, std::vector<cplx> b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (const cplx& x : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](const cplx& p, const cplx& q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

} // namespace

TEST_CASE("reduced and full eigen routes agree", "[dispersion]") {
  const GridSpec g = GridSpec::cubic(4, 0.01);
  const double dt = 0.99 * cfl_max_dt(g, constants::c0);
  for (const std::array<double, 3>& phase : {std::array<double, 3>{0.3, -0.2, 0.5}, std::array<double, 3>{0.0, 0.0, 0.0}}) {
    const auto full = eigenvalues(build_amplification(g, dt, phase).matrix);
    const auto red = reduced_spectrum(g, dt, phase);
    REQUIRE(red.hermitian_residual < 1e-12);
    for (double mu : red.mus) REQUIRE(mu <= 0.0);
    REQUIRE(spectrum_distance(red.lambdas, full) < 1e-10);
  }
}

TEST_CASE("eigenvalues lie on the unit circle below the CFL limit", "[dispersion][property]") {
  const GridSpec g{{4, 5, 4}, {0.01, 0.008, 0.012}};
  for (double f : {0.3, 0.7, 0.99}) {
    const double dt = f * cfl_max_dt(g, constants::c0);
    for (const auto& phase : {std::array<double, 3>{0.1, 0.2, 0.3}, std::array<double, 3>{pi, -1.0, 0.0}}) {
      INFO("factor " << f);
      REQUIRE(max_unit_deviation(amplification_eigenvalues_reduced(g, dt, phase)) <= 1e-9);
    }
  }
}

TEST_CASE("an oversized time step leaves the unit circle", "[dispersion]") {
  const GridSpec g = GridSpec::cubic(6, 0.01);
  const double dt = 1.2 * cfl_max_dt(g, constants::c0);
  const auto lam = amplification_eigenvalues_reduced(g, dt, bloch_phases(g, wave_vector(2 * pi / 0.2, pi / 2, 0.0)));
  REQUIRE(max_unit_deviation(lam) > 1.0);
}

TEST_CASE("wave vector and Bloch phases", "[dispersion]") {
  const auto k = wave_vector(2.0, pi / 2, 0.0);
  REQUIRE_THAT(k[0], WithinAbs(2.0, 1e-15));
  REQUIRE_THAT(k[1], WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(k[2], WithinAbs(0.0, 1e-15));
  const auto d = wave_vector(1.0, std::acos(1.0 / std::sqrt(3.0)), pi / 4);
  for (double v : d) REQUIRE_THAT(v, WithinAbs(1.0 / std::sqrt(3.0), 1e-15));
  REQUIRE_THAT(wave_vector(3.0, 0.0, 1.0)[2], WithinAbs(3.0, 1e-15));
  const GridSpec g{{4, 5, 6}, {0.1, 0.2, 0.3}};
  const auto a = bloch_phases(g, {1.0, 2.0, 3.0});
  REQUIRE_THAT(a[0], WithinRel(0.4, 1e-15));
  REQUIRE_THAT(a[1], WithinRel(2.0, 1e-15));
  REQUIRE_THAT(a[2], WithinRel(5.4, 1e-15));
}

TEST_CASE("wavenumber selection picks the branch nearest k0", "[dispersion]") {
  const double c = constants::c0, dt = 1e-11, k0 = 30.0;
  const cplx j(0.0, 1.0);
  const std::vector<cplx> lam{std::exp(j * k0 * c * dt), std::exp(-j * k0 * c * dt), 1.0, 5.0};
  const auto w = numerical_wavenumbers(lam, dt, k0);
  REQUIRE(w.candidates.size() == 3); // 5.0 is discarded
  REQUIRE_THAT(w.selected.real(), WithinRel(k0, 1e-12));
  REQUIRE_THAT(w.selected.imag(), WithinAbs(0.0, 1e-12));
  REQUIRE_THROWS_AS(numerical_wavenumbers(std::vector<cplx>{4.0}, dt, k0), NumericalError);
}

TEST_CASE("error metric literals", "[dispersion]") {
  const double k0 = 2 * pi / 0.2, lw = 0.2;
  auto e = error_metrics(k0, k0);
  REQUIRE_THAT(e.dispersion, WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(e.dissipation, WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(e.global, WithinAbs(0.0, 1e-12));
  const double delta = 0.01;
  e = error_metrics(k0, k0 * (1 + delta));
  REQUIRE_THAT(e.dispersion, WithinRel(2 * std::sin(pi * delta), 1e-9));
  REQUIRE_THAT(e.global, WithinRel(2 * std::sin(pi * delta), 1e-9));
  REQUIRE_THAT(e.dissipation, WithinAbs(0.0, 1e-15));
  const double kappa = -0.05;
  e = error_metrics(k0, cplx(k0, kappa));
  REQUIRE_THAT(e.dispersion, WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(e.dissipation, WithinRel(2 * std::abs(std::sin(kappa * lw / 2)), 1e-9));
  REQUIRE_THAT(e.global, WithinRel(std::abs(1 - std::exp(kappa * lw)), 1e-9));
}

TEST_CASE("normal incidence errors at twenty cells per wavelength", "[dispersion][property]") {
  const double h = 0.01, k0 = 2 * pi / (20 * h);
  const GridSpec g = GridSpec::cubic(4, h);
  const double dt = 0.99 * cfl_max_dt(g, constants::c0);
  const DispersionResult r = analyze_direction(g, dt, k0, pi / 2, 0.0);
  REQUIRE(r.errors.dispersion > 0.0);
  REQUIRE(r.errors.dissipation <= 0.1 * r.errors.dispersion);
  REQUIRE(r.max_abs_lambda <= 1.0 + 1e-9);
  REQUIRE_THAT(r.wavelength, WithinRel(20 * h, 1e-14));
}

TEST_CASE("global error decreases under grid refinement", "[dispersion][property]") {
  const double k0 = 2 * pi / 0.2;
  double prev = std::numeric_limits<double>::infinity();
  for (double h : {0.01, 0.005, 0.0025}) {
    const GridSpec g = GridSpec::cubic(4, h);
    const double dt = 0.99 * cfl_max_dt(g, constants::c0);
    const double e = analyze_direction(g, dt, k0, pi / 2, 0.0).errors.global;
    INFO("h = " << h << " global " << e);
    REQUIRE(e < prev);
    prev = e;
  }
}

TEST_CASE("axis directions carry the largest error in a coarse scan", "[dispersion][property]") {
  const double h = 0.01, k0 = 2 * pi / (20 * h);
  const GridSpec g = GridSpec::cubic(4, h);
  const double dt = 0.99 * cfl_max_dt(g, constants::c0);
  const std::vector<double> th{0.0, pi / 6, pi / 4, pi / 3, pi / 2}, ph{0.0, pi / 4, pi / 2};
  const auto scan = angle_scan(th, ph, k0, g, dt);
  REQUIRE(scan.size() == 15);
  double axis = 0.0, other = 0.0;
  for (const auto& p : scan) {
    const bool on_axis = p.theta == 0.0 || (p.theta == pi / 2 && (p.phi == 0.0 || p.phi == pi / 2));
    (on_axis ? axis : other) = std::max(on_axis ? axis : other, p.errors.global);
  }
  REQUIRE(axis > other);
}

TEST_CASE("dimension caps", "[dispersion]") {
  const GridSpec g = GridSpec::cubic(8, 0.01);
  REQUIRE_THROWS_WITH(build_amplification(g, 1e-12, {0, 0, 0}), ContainsSubstring("exceeds the cap of 5000; use fewer cells"));
  REQUIRE_THROWS_WITH(reduced_spectrum(GridSpec::cubic(4, 0.01), 1e-12, {0, 0, 0}, 100), ContainsSubstring("exceeds the cap of 100"));
}
