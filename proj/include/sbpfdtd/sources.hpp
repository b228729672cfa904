#pragma once

// Excitation waveforms, soft current sources and probe definitions.

#include "sbpfdtd/constants.hpp"
#include "sbpfdtd/error.hpp"
#include "sbpfdtd/grid.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace sbpfdtd {

enum class WaveformKind { Gaussian, ModulatedGaussian, Sinusoid };

struct Waveform {
  WaveformKind kind = WaveformKind::Gaussian;
  double t_w = 1e-9;  // Gaussian width parameter (s)
  double t_0 = 1e-9;  // Gaussian centre (s)
  double freq = 0.0;  // carrier (Hz), modulated / sinusoid only

  void validate() const {
    if (kind != WaveformKind::Sinusoid && !(t_w > 0.0)) throw ConfigError("waveform t_w must be positive");
    if (kind != WaveformKind::Gaussian && !(freq > 0.0)) throw ConfigError("waveform frequency must be positive");
  }
};

inline double gaussian_envelope(double t, double t_w, double t_0) {
  const double x = (t - t_0) / t_w;
  return std::exp(-4.0 * constants::pi * x * x);
}

/// Integral of the Gaussian envelope over the real line.
inline double gaussian_integral(double t_w) { return 0.5 * t_w; }

/// A node range of one component, inclusive on both ends. A point source
/// is a range with lo == hi.
struct NodeRange {
  Component component = Component::Ez;
  std::array<int, 3> lo{};
  std::array<int, 3> hi{};

  static NodeRange point(Component c, int i, int j, int k) { return {c, {i, j, k}, {i, j, k}}; }
  std::size_t count() const noexcept {
    std::size_t s = 1;
    for (int a = 0; a < 3; ++a) s *= static_cast<std::size_t>(hi[a] - lo[a] + 1);
    return s;
  }
};

/// Soft source: amplitude * waveform(t) is added to the right-hand side of
/// the E equation (a current density with opposite sign), at every node of
/// the target range.
struct SourceSpec {
  Waveform waveform;
  NodeRange target;
  double amplitude = 1.0;

  void validate(const GridSpec& g) const {
    waveform.validate();
    if (!is_electric(target.component)) throw ConfigError("sources must drive an electric component");
    const ComponentLayout l = layout_for(g, target.component);
    for (int a = 0; a < 3; ++a)
      if (target.lo[a] < 0 || target.hi[a] >= l.dims[a] || target.lo[a] > target.hi[a])
        throw ConfigError("source node range outside the " + std::string(component_name(target.component)) + " layout");
  }
};

inline double waveform_value(const Waveform& w, double t) {
  switch (w.kind) {
  case WaveformKind::Gaussian:
    return gaussian_envelope(t, w.t_w, w.t_0);
  case WaveformKind::ModulatedGaussian:
    return std::sin(2.0 * constants::pi * w.freq * t) * gaussian_envelope(t, w.t_w, w.t_0);
  case WaveformKind::Sinusoid:
    return std::sin(2.0 * constants::pi * w.freq * t);
  }
  return 0.0;
}

inline double waveform_value(const SourceSpec& s, double t) { return s.amplitude * waveform_value(s.waveform, t); }

enum class ProbeKind { PointField, PlaneFlux };

/// PointField records one node of one component. PlaneFlux records the
/// tangential E and H on the plane at Plus-grid index `position` along
/// `axis`, over the cell rectangle [extent[0], extent[1]) x [extent[2],
/// extent[3]) of the two transverse axes (ascending order). An extent of all
/// zeros means the whole plane.
struct ProbeSpec {
  std::string name;
  ProbeKind kind = ProbeKind::PointField;
  Component component = Component::Ez;
  std::array<int, 3> node{};
  int axis = 2;
  int position = 1;
  std::array<int, 4> extent{};
  int stride = 1;

  std::array<int, 4> resolved_extent(const GridSpec& g) const {
    if (extent == std::array<int, 4>{}) {
      const auto t = transverse_axes(axis);
      return {0, g.n[t[0]], 0, g.n[t[1]]};
    }
    return extent;
  }

  void validate(const GridSpec& g) const {
    if (stride < 1) throw ConfigError("probe '" + name + "': stride must be at least 1");
    if (kind == ProbeKind::PointField) {
      const ComponentLayout l = layout_for(g, component);
      if (!l.contains(node[0], node[1], node[2]))
        throw ConfigError("probe '" + name + "': node outside the " + std::string(component_name(component)) + " layout");
      return;
    }
    if (axis < 0 || axis > 2) throw ConfigError("probe '" + name + "': plane axis must be x, y or z");
    if (position < 1 || position > g.n[axis] - 1)
      throw ConfigError("probe '" + name + "': plane position must be an interior Plus-grid index");
    const auto t = transverse_axes(axis);
    const auto e = resolved_extent(g);
    if (e[0] < 0 || e[1] > g.n[t[0]] || e[0] >= e[1] || e[2] < 0 || e[3] > g.n[t[1]] || e[2] >= e[3])
      throw ConfigError("probe '" + name + "': plane extent outside the grid");
  }
};

} // namespace sbpfdtd
