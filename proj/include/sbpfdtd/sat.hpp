#pragma once

// Boundary types and penalty (SAT) coefficients.
//
// On a face with normal axis c, every tangential electric component E_a is
// paired with the magnetic component H_b, b = 3 - a - c, that shares its
// boundary nodes. sigma penalises E_a in the H_b update, chi penalises H_b
// in the E_a update. Coefficients are indexed [face][slot], where slot 0 is
// the lower of the two tangential axes.

#include "sbpfdtd/error.hpp"
#include "sbpfdtd/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>

namespace sbpfdtd {

enum class BoundaryType { PEC, PMC, Periodic };

inline std::string_view boundary_name(BoundaryType b) noexcept {
  switch (b) {
  case BoundaryType::PEC: return "pec";
  case BoundaryType::PMC: return "pmc";
  case BoundaryType::Periodic: return "periodic";
  }
  return "?";
}

inline BoundaryType parse_boundary(std::string_view s) {
  if (s == "pec") return BoundaryType::PEC;
  if (s == "pmc") return BoundaryType::PMC;
  if (s == "periodic") return BoundaryType::Periodic;
  throw ConfigError("unknown boundary type '" + std::string(s) + "'");
}

/// Sign of the curl term pairing E_a with H_b across a face of normal c:
/// +1 when c follows a cyclically, -1 otherwise.
constexpr int curl_sign(int a, int c) noexcept { return c == (a + 1) % 3 ? 1 : -1; }

/// Electric component axis carried in a face slot.
constexpr int slot_axis(Face f, int slot) noexcept { return transverse_axes(face_axis(f))[slot]; }

/// Magnetic partner axis of E_a on a face of normal c.
constexpr int partner_axis(int a, int c) noexcept { return 3 - a - c; }

struct SatConfig {
  std::array<BoundaryType, 6> type{};
  std::array<std::array<double, 2>, 6> sigma{};
  std::array<std::array<double, 2>, 6> chi{};
  std::array<double, 3> phase{};

  BoundaryType at(Face f) const noexcept { return type[static_cast<int>(f)]; }
  double& sigma_at(Face f, int slot) noexcept { return sigma[static_cast<int>(f)][slot]; }
  double& chi_at(Face f, int slot) noexcept { return chi[static_cast<int>(f)][slot]; }
  double sigma_at(Face f, int slot) const noexcept { return sigma[static_cast<int>(f)][slot]; }
  double chi_at(Face f, int slot) const noexcept { return chi[static_cast<int>(f)][slot]; }

  /// Neutral coefficients for the given face types.
  static SatConfig make(const std::array<BoundaryType, 6>& types, std::array<double, 3> phases = {}) {
    SatConfig s;
    s.type = types;
    s.phase = phases;
    for (Face f : all_faces) {
      const int c = face_axis(f);
      const double side = face_is_high(f) ? -1.0 : 1.0;
      for (int slot = 0; slot < 2; ++slot) {
        const double v = side * curl_sign(slot_axis(f, slot), c);
        switch (s.at(f)) {
        case BoundaryType::PEC: s.sigma_at(f, slot) = v; break;
        case BoundaryType::PMC: s.chi_at(f, slot) = v; break;
        case BoundaryType::Periodic:
          s.sigma_at(f, slot) = 0.5 * v;
          s.chi_at(f, slot) = 0.5 * v;
          break;
        }
      }
    }
    return s;
  }

  static SatConfig uniform(BoundaryType b, std::array<double, 3> phases = {}) {
    std::array<BoundaryType, 6> t;
    t.fill(b);
    return make(t, phases);
  }

  bool periodic(int axis) const noexcept { return type[2 * axis] == BoundaryType::Periodic; }
  bool needs_complex() const noexcept {
    for (int a = 0; a < 3; ++a)
      if (periodic(a) && phase[a] != 0.0) return true;
    return false;
  }

  void validate(ScalarMode mode) const {
    for (int a = 0; a < 3; ++a) {
      const bool lo = type[2 * a] == BoundaryType::Periodic, hi = type[2 * a + 1] == BoundaryType::Periodic;
      if (lo != hi) throw ConfigError("periodic boundary on axis " + std::to_string(a) + " needs both opposing faces periodic");
    }
    if (needs_complex() && mode != ScalarMode::Complex)
      throw ConfigError("nonzero Bloch phase requires complex fields");
    for (Face f : all_faces)
      for (int slot = 0; slot < 2; ++slot) {
        if (at(f) == BoundaryType::PEC && chi_at(f, slot) != 0.0)
          throw ConfigError("PEC face " + std::string(face_name(f)) + " cannot carry a chi penalty");
        if (at(f) == BoundaryType::PMC && sigma_at(f, slot) != 0.0)
          throw ConfigError("PMC face " + std::string(face_name(f)) + " cannot carry a sigma penalty");
      }
  }

  /// Largest bracket of the semi-discrete energy rate. Zero means the
  /// penalties cancel every boundary term exactly.
  double energy_rate_residual() const {
    double r = 0.0;
    for (Face f : all_faces) {
      const int c = face_axis(f);
      const double side = face_is_high(f) ? 1.0 : -1.0;
      for (int slot = 0; slot < 2; ++slot) {
        const double s = curl_sign(slot_axis(f, slot), c);
        const double sg = sigma_at(f, slot), ch = chi_at(f, slot);
        if (at(f) != BoundaryType::Periodic) {
          r = std::max(r, std::abs(side * s + sg + ch));
          continue;
        }
        // Self terms and the cross terms coupling this face to its partner.
        const Face o = opposite(f);
        r = std::max(r, std::abs(side * s + sg + ch));
        r = std::max(r, std::abs(sg + chi_at(o, slot)));
      }
    }
    return r;
  }
};

/// Bloch factor applied to the opposite face's value when penalising on
/// face f: e^{-j alpha} on the high face, its conjugate on the low face.
template <class T>
T bloch_factor(const SatConfig& s, Face f) {
  if constexpr (std::is_same_v<T, std::complex<double>>) {
    const double a = s.phase[face_axis(f)];
    return std::polar(1.0, face_is_high(f) ? -a : a);
  } else {
    return T{1};
  }
}

} // namespace sbpfdtd
