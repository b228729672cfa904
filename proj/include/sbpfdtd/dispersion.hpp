#pragma once

// Numerical dispersion of the fully discrete scheme on a Bloch-periodic
// vacuum cell: the one-step amplification matrix is probed column by column
// through the solver kernels, its eigenvalues give numerical wavenumbers.

#include "sbpfdtd/constants.hpp"
#include "sbpfdtd/diagnostics.hpp"
#include "sbpfdtd/error.hpp"
#include "sbpfdtd/grid.hpp"
#include "sbpfdtd/materials.hpp"
#include "sbpfdtd/sat.hpp"
#include "sbpfdtd/solver.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace sbpfdtd {

using cplx = std::complex<double>;

struct AmplificationMatrix {
  Eigen::MatrixXcd matrix;
  double dt = 0.0;
  GridSpec grid;
  Eigen::Index n_e = 0, n_h = 0;
};

inline constexpr Eigen::Index default_dimension_cap = 5000;

namespace detail {

inline Solver<cplx> vacuum_periodic_solver(const GridSpec& g, double dt, const std::array<double, 3>& phase) {
  MaterialGrid m(g);
  return Solver<cplx>(g, m, SatConfig::uniform(BoundaryType::Periodic, phase), dt);
}

inline void load_state(FieldSet<cplx>& f, const Eigen::VectorXcd& u) {
  Eigen::Index o = 0;
  for (Component c : all_components)
    for (auto& v : f[c].data) v = u[o++];
}

inline Eigen::VectorXcd store_state(const FieldSet<cplx>& f) {
  Eigen::VectorXcd u(static_cast<Eigen::Index>(f.total_size()));
  Eigen::Index o = 0;
  for (Component c : all_components)
    for (const auto& v : f[c].data) u[o++] = v;
  return u;
}

inline Eigen::Index electric_size(const FieldSet<cplx>& f) {
  return static_cast<Eigen::Index>(f[Component::Ex].size() + f[Component::Ey].size() + f[Component::Ez].size());
}

} // namespace detail

/// Column j is one leapfrog step applied to the unit vector e_j of the
/// stacked state [Ex, Ey, Ez, Hx, Hy, Hz].
inline AmplificationMatrix build_amplification(const GridSpec& g, double dt, const std::array<double, 3>& phase,
                                               Eigen::Index cap = default_dimension_cap) {
  Solver<cplx> s = detail::vacuum_periodic_solver(g, dt, phase);
  const Eigen::Index n = static_cast<Eigen::Index>(s.fields().total_size());
  if (n > cap)
    throw ConfigError("amplification matrix dimension " + std::to_string(n) + " exceeds the cap of " +
                      std::to_string(cap) + "; use fewer cells per axis");
  AmplificationMatrix a;
  a.dt = dt;
  a.grid = g;
  a.n_e = detail::electric_size(s.fields());
  a.n_h = n - a.n_e;
  a.matrix.resize(n, n);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e.setZero();
    e[j] = 1.0;
    detail::load_state(s.fields(), e);
    s.step();
    a.matrix.col(j) = detail::store_state(s.fields());
  }
  return a;
}

/// Eigenvalues of a general complex matrix (LAPACK zgeev, no vectors).
inline std::vector<cplx> eigenvalues(Eigen::MatrixXcd m) {
  const lapack_int n = static_cast<lapack_int>(m.rows());
  if (m.rows() != m.cols()) throw DimensionError("eigenvalues: matrix must be square");
  std::vector<cplx> w(static_cast<std::size_t>(n));
  if (n == 0) return w;
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, m.data(), n, w.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw NumericalError("eigenvalue solver did not converge (zgeev info " + std::to_string(info) + ")");
  return w;
}

/// Eigenvalues of a Hermitian matrix (LAPACK zheevd, no vectors); only the
/// upper triangle is read.
inline std::vector<double> hermitian_eigenvalues(Eigen::MatrixXcd m) {
  const lapack_int n = static_cast<lapack_int>(m.rows());
  if (m.rows() != m.cols()) throw DimensionError("hermitian_eigenvalues: matrix must be square");
  std::vector<double> w(static_cast<std::size_t>(n));
  if (n == 0) return w;
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', n, m.data(), n, w.data());
  if (info != 0) throw NumericalError("Hermitian eigenvalue solver failed (zheevd info " + std::to_string(info) + ")");
  return w;
}

struct ReducedSpectrum {
  std::vector<cplx> lambdas;
  std::vector<double> mus;           // eigenvalues of A_e A_h, real and <= 0 for a neutral scheme
  double hermitian_residual = 0.0;   // relative non-Hermitian part after the similarity transform
};

/// Eigenvalues of the amplification matrix through the E-block reduction.
/// Every eigenvalue mu of A_e A_h yields the two roots of
/// lambda^2 - (2 + dt^2 mu) lambda + 1 = 0, and the remaining n_h - n_e
/// eigenvalues equal 1. A_h and A_e are probed with half steps. In the
/// energy norm D = eps P_e the product is similar to a Hermitian negative
/// semi-definite matrix, so mu is computed with a Hermitian solver: this
/// keeps the double roots at lambda = 1 (static fields) on the unit circle
/// instead of splitting them by sqrt(machine epsilon).
inline ReducedSpectrum reduced_spectrum(const GridSpec& g, double dt, const std::array<double, 3>& phase,
                                        Eigen::Index cap = default_dimension_cap) {
  Solver<cplx> s = detail::vacuum_periodic_solver(g, dt, phase);
  const Eigen::Index n = static_cast<Eigen::Index>(s.fields().total_size());
  const Eigen::Index ne = detail::electric_size(s.fields()), nh = n - ne;
  if (ne > cap)
    throw ConfigError("reduced eigen-problem dimension " + std::to_string(ne) + " exceeds the cap of " +
                      std::to_string(cap) + "; use fewer cells per axis");
  Eigen::MatrixXcd ah(nh, ne), ae(ne, nh);
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index j = 0; j < ne; ++j) {
    u.setZero();
    u[j] = 1.0;
    detail::load_state(s.fields(), u);
    s.update_h();
    ah.col(j) = detail::store_state(s.fields()).tail(nh) / dt;
  }
  for (Eigen::Index j = 0; j < nh; ++j) {
    u.setZero();
    u[ne + j] = 1.0;
    detail::load_state(s.fields(), u);
    s.update_e(0.0);
    ae.col(j) = detail::store_state(s.fields()).head(ne) / dt;
  }

  const EnergyMonitor mon(s);
  Eigen::VectorXd d(ne);
  Eigen::Index o = 0;
  for (int a = 0; a < 3; ++a)
    for (double w : mon.weights(electric(a))) d[o++] = std::sqrt(w);
  Eigen::MatrixXcd herm = d.asDiagonal() * (ae * ah) * d.cwiseInverse().asDiagonal();
  ReducedSpectrum r;
  const double scale = herm.cwiseAbs().maxCoeff();
  r.hermitian_residual = scale > 0.0 ? (herm - herm.adjoint()).cwiseAbs().maxCoeff() / scale : 0.0;
  herm = 0.5 * (herm + herm.adjoint()).eval();
  r.mus = hermitian_eigenvalues(std::move(herm));
  // Static fields give mu = 0 up to rounding; a mu of roundoff size would
  // turn the double root at 1 into 1 +- sqrt(eps). Larger positive values
  // are kept since they signal a non-neutral operator.
  double mu_scale = 0.0;
  for (double mu : r.mus) mu_scale = std::max(mu_scale, std::abs(mu));
  for (double& mu : r.mus)
    if (std::abs(mu) <= 1e-12 * mu_scale) mu = 0.0;

  r.lambdas.reserve(static_cast<std::size_t>(n));
  for (double mu : r.mus) {
    const double b = 1.0 + 0.5 * dt * dt * mu;
    if (std::abs(b) <= 1.0) {
      const double q = std::sqrt(1.0 - b * b);
      r.lambdas.emplace_back(b, q);
      r.lambdas.emplace_back(b, -q);
    } else {
      const double q = std::sqrt(b * b - 1.0);
      r.lambdas.emplace_back(b + q, 0.0);
      r.lambdas.emplace_back(b - q, 0.0);
    }
  }
  for (Eigen::Index j = 0; j < nh - ne; ++j) r.lambdas.emplace_back(1.0, 0.0);
  return r;
}

inline std::vector<cplx> amplification_eigenvalues_reduced(const GridSpec& g, double dt, const std::array<double, 3>& phase,
                                                           Eigen::Index cap = default_dimension_cap) {
  return reduced_spectrum(g, dt, phase, cap).lambdas;
}

struct WavenumberSelection {
  std::vector<cplx> candidates; // one per retained eigenvalue
  cplx selected{};
  cplx lambda{};
};

/// k = ln(lambda) / (j c dt) on the principal branch for every eigenvalue
/// within 0.5 of the unit circle; selects the one nearest to k0.
inline WavenumberSelection numerical_wavenumbers(const std::vector<cplx>& lambdas, double dt, double k0,
                                                 double c = constants::c0) {
  WavenumberSelection r;
  double best = std::numeric_limits<double>::infinity();
  for (const cplx& l : lambdas) {
    if (std::abs(std::abs(l) - 1.0) > 0.5) continue;
    const cplx k = std::log(l) / (cplx(0.0, 1.0) * c * dt);
    r.candidates.push_back(k);
    const double d = std::abs(k - k0);
    if (d < best) {
      best = d;
      r.selected = k;
      r.lambda = l;
    }
  }
  if (r.candidates.empty()) throw NumericalError("no eigenvalue near the unit circle");
  return r;
}

inline WavenumberSelection numerical_wavenumbers(const AmplificationMatrix& a, double k0, double c = constants::c0) {
  return numerical_wavenumbers(eigenvalues(a.matrix), a.dt, k0, c);
}

struct ErrorMetrics {
  double dispersion = 0.0;
  double dissipation = 0.0;
  double global = 0.0;
};

/// Evaluated over one wavelength lambda = 2 pi / k0.
inline ErrorMetrics error_metrics(double k0, cplx k_num) {
  const double lw = 2.0 * constants::pi / k0;
  const cplx j(0.0, 1.0);
  ErrorMetrics e;
  e.dispersion = std::abs(std::exp(-j * k0 * lw) - std::exp(-j * k_num.real() * lw));
  e.dissipation = std::abs(1.0 - std::exp(-j * k_num.imag() * lw));
  e.global = std::abs(std::exp(-j * k0 * lw) - std::exp(-j * k_num * lw));
  return e;
}

struct DispersionResult {
  double k0 = 0.0;
  cplx k_num{};
  double wavelength = 0.0;
  ErrorMetrics errors;
  double max_abs_lambda = 0.0;
};

enum class EigenRoute { Full, Reduced };

/// Plane-wave direction (theta from z, phi from x in the xy plane).
inline std::array<double, 3> wave_vector(double k0, double theta, double phi) {
  return {k0 * std::sin(theta) * std::cos(phi), k0 * std::sin(theta) * std::sin(phi), k0 * std::cos(theta)};
}

/// Bloch phases of a periodic cell: alpha_i = k_i * (N_i h_i).
inline std::array<double, 3> bloch_phases(const GridSpec& g, const std::array<double, 3>& k) {
  return {k[0] * g.n[0] * g.h[0], k[1] * g.n[1] * g.h[1], k[2] * g.n[2] * g.h[2]};
}

inline DispersionResult analyze_direction(const GridSpec& g, double dt, double k0, double theta, double phi,
                                          EigenRoute route = EigenRoute::Reduced, Eigen::Index cap = default_dimension_cap) {
  const auto phase = bloch_phases(g, wave_vector(k0, theta, phi));
  const std::vector<cplx> lam = route == EigenRoute::Full ? eigenvalues(build_amplification(g, dt, phase, cap).matrix)
                                                          : amplification_eigenvalues_reduced(g, dt, phase, cap);
  DispersionResult r;
  r.k0 = k0;
  r.wavelength = 2.0 * constants::pi / k0;
  r.k_num = numerical_wavenumbers(lam, dt, k0).selected;
  r.errors = error_metrics(k0, r.k_num);
  for (const cplx& l : lam) r.max_abs_lambda = std::max(r.max_abs_lambda, std::abs(l));
  return r;
}

struct ScanPoint {
  double theta = 0.0, phi = 0.0;
  ErrorMetrics errors;
};

inline std::vector<ScanPoint> angle_scan(const std::vector<double>& thetas, const std::vector<double>& phis, double k0,
                                         const GridSpec& g, double dt, EigenRoute route = EigenRoute::Reduced,
                                         Eigen::Index cap = default_dimension_cap) {
  std::vector<ScanPoint> out;
  out.reserve(thetas.size() * phis.size());
  for (double th : thetas)
    for (double ph : phis) out.push_back({th, ph, analyze_direction(g, dt, k0, th, ph, route, cap).errors});
  return out;
}

} // namespace sbpfdtd
