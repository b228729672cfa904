#pragma once

// Self-check suites behind `sbpfdtd verify`: operator identity and
// accuracy, semi-discrete energy neutrality of the penalties, and
// equivalence of the matrix-free step with the dense reference.

#include "sbpfdtd/reference.hpp"
#include "sbpfdtd/sbp_operators.hpp"
#include "sbpfdtd/solver.hpp"

#include <complex>
#include <random>
#include <string>
#include <vector>

namespace sbpfdtd {

struct CheckResult {
  std::string invariant;
  std::string detail;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed() const noexcept { return value <= tolerance; }
};

/// Deliberate faults for exercising the failure path of the suites.
enum class Perturbation { None, Identity, Neutrality, Oracle };

inline Perturbation parse_perturbation(std::string_view s) {
  if (s == "none") return Perturbation::None;
  if (s == "identity") return Perturbation::Identity;
  if (s == "neutrality") return Perturbation::Neutrality;
  if (s == "oracle") return Perturbation::Oracle;
  throw ConfigError("perturbation must be none, identity, neutrality or oracle");
}

inline std::vector<CheckResult> check_sbp(int n, Perturbation p = Perturbation::None) {
  SbpOperatorPair op = build_sbp_pair(n, 1.0 / n);
  if (p == Perturbation::Identity) op.d_plus[0].w[0] *= 1.0 + 1e-6;
  const SbpReport r = verify_sbp(op);
  const std::string tag = "n=" + std::to_string(n);
  std::vector<CheckResult> out{{"sbp-identity", tag, r.identity_residual, SbpReport::tolerance}};
  const char* names[4] = {"D+ constant", "D+ linear", "D- constant", "D- linear"};
  for (int q = 0; q < 4; ++q) out.push_back({"sbp-accuracy", tag + " " + names[q], r.accuracy_residuals[q], SbpReport::tolerance});
  return out;
}

inline MaterialGrid verification_materials(const GridSpec& g) {
  MaterialGrid m(g);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.eps_r[i] = 1.0 + 0.5 * static_cast<double>(i % 3);
    m.mu_r[i] = 1.0 + 0.25 * static_cast<double>(i % 2);
  }
  return m;
}

inline SatConfig verification_sat(BoundaryType b) {
  return SatConfig::uniform(b, b == BoundaryType::Periodic ? std::array<double, 3>{0.3, -0.7, 1.1} : std::array<double, 3>{});
}

inline CheckResult check_neutrality(const GridSpec& g, BoundaryType b, Perturbation p = Perturbation::None) {
  SatConfig sat = verification_sat(b);
  if (p == Perturbation::Neutrality) {
    Face f = Face::XHigh;
    if (b == BoundaryType::PMC)
      sat.chi_at(f, 0) = -sat.chi_at(f, 0);
    else
      sat.sigma_at(f, 0) = -sat.sigma_at(f, 0);
  }
  const DenseSystem s = assemble_reference(g, verification_materials(g), sat);
  return {"energy-neutrality", std::string(boundary_name(b)) + " " + std::to_string(g.n[0]) + "^3", energy_rate_residual(s), 1e-12};
}

/// Relative difference between one kernel step and the dense step applied
/// to a random complex state.
inline CheckResult check_oracle(const GridSpec& g, BoundaryType b, Perturbation p = Perturbation::None, unsigned seed = 7) {
  using C = std::complex<double>;
  const MaterialGrid m = verification_materials(g);
  const SatConfig sat = verification_sat(b);
  const DenseSystem ds = assemble_reference(g, m, sat);
  const double dt = 0.5 * cfl_max_dt(g, m);
  Eigen::MatrixXcd L = reference_one_step(ds, dt);
  if (p == Perturbation::Oracle) L(0, 0) += 1e-6;

  Solver<C> s(g, m, sat, dt);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd u(ds.n_e + ds.n_h);
  for (auto& x : u) x = C(nd(rng), nd(rng));
  Eigen::Index o = 0;
  for (Component c : all_components)
    for (auto& v : s.fields()[c].data) v = u[o++];
  s.step();
  Eigen::VectorXcd v(u.size());
  o = 0;
  for (Component c : all_components)
    for (const auto& x : s.fields()[c].data) v[o++] = x;
  const Eigen::VectorXcd ref = L * u;
  return {"oracle-equivalence", std::string(boundary_name(b)) + " " + std::to_string(g.n[0]) + "^3",
          (v - ref).norm() / ref.norm(), 1e-12};
}

} // namespace sbpfdtd
