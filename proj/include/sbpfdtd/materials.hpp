#pragma once

// Per-cell material properties and their sampling onto component nodes.

#include "sbpfdtd/constants.hpp"
#include "sbpfdtd/error.hpp"
#include "sbpfdtd/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sbpfdtd {

struct MaterialGrid {
  std::array<int, 3> n{};
  std::vector<double> eps_r;
  std::vector<double> mu_r;
  std::vector<double> sigma_e;
  std::vector<double> rho;

  MaterialGrid() = default;
  explicit MaterialGrid(const GridSpec& g)
      : n(g.n), eps_r(g.cell_count(), 1.0), mu_r(g.cell_count(), 1.0), sigma_e(g.cell_count(), 0.0),
        rho(g.cell_count(), 0.0) {}

  std::size_t cell(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(n[1]) * static_cast<std::size_t>(k));
  }
  std::size_t size() const noexcept { return eps_r.size(); }

  /// Throws ConfigError naming the first offending cell.
  void validate() const {
    for (std::size_t c = 0; c < size(); ++c) {
      if (!(eps_r[c] > 0.0)) throw ConfigError("eps_r must be positive (cell " + std::to_string(c) + ")");
      if (!(mu_r[c] > 0.0)) throw ConfigError("mu_r must be positive (cell " + std::to_string(c) + ")");
      if (!(sigma_e[c] >= 0.0)) throw ConfigError("sigma must be non-negative (cell " + std::to_string(c) + ")");
      if (!(rho[c] >= 0.0)) throw ConfigError("rho must be non-negative (cell " + std::to_string(c) + ")");
    }
  }

  /// Fastest wave speed over all cells.
  double max_wave_speed() const {
    double c = 0.0;
    for (std::size_t i = 0; i < size(); ++i) c = std::max(c, constants::c0 / std::sqrt(eps_r[i] * mu_r[i]));
    return c;
  }
};

struct NodeMaterial {
  double eps = constants::eps0;
  double mu = constants::mu0;
  double sigma = 0.0;
};

namespace detail {

// Cells adjacent to a node along one axis: one or two cell indices.
inline std::array<int, 2> adjacent_cells(NodeKind kind, int node, int n_cells, int& count) {
  if (kind == NodeKind::Plus) {
    const int lo = std::max(node - 1, 0);
    const int hi = std::min(node, n_cells - 1);
    count = lo == hi ? 1 : 2;
    return {lo, hi};
  }
  count = 1;
  if (node == 0) return {0, 0};
  if (node == n_cells + 1) return {n_cells - 1, n_cells - 1};
  return {node - 1, node - 1};
}

} // namespace detail

/// Material seen by one node of a component. E nodes average eps and sigma
/// over the cells touching their edge, H nodes average mu over the cells
/// touching their face.
inline NodeMaterial sample_material(const MaterialGrid& m, Component comp, int i, int j, int k) {
  GridSpec g;
  g.n = m.n;
  const ComponentLayout l = layout_for(g, comp);
  if (!l.contains(i, j, k))
    throw DimensionError("sample_material: node (" + std::to_string(i) + "," + std::to_string(j) + "," +
                         std::to_string(k) + ") outside " + std::string(component_name(comp)) + " layout");
  const std::array<int, 3> node{i, j, k};
  std::array<std::array<int, 2>, 3> cells{};
  std::array<int, 3> counts{};
  for (int a = 0; a < 3; ++a) cells[a] = detail::adjacent_cells(l.kinds[a], node[a], m.n[a], counts[a]);

  double eps = 0.0, mu = 0.0, sigma = 0.0;
  int total = 0;
  for (int c2 = 0; c2 < counts[2]; ++c2)
    for (int c1 = 0; c1 < counts[1]; ++c1)
      for (int c0 = 0; c0 < counts[0]; ++c0) {
        const std::size_t c = m.cell(cells[0][c0], cells[1][c1], cells[2][c2]);
        eps += m.eps_r[c];
        mu += m.mu_r[c];
        sigma += m.sigma_e[c];
        ++total;
      }
  NodeMaterial out;
  out.eps = constants::eps0 * (eps / total);
  out.mu = constants::mu0 * (mu / total);
  out.sigma = sigma / total;
  return out;
}

/// Axis-aligned box in metres, cells are included by centre membership.
struct BoxRegion {
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
};

/// Cylinder along z: centre (x, y), radius, and z extent [z0, z0 + height].
struct CylinderRegion {
  double cx = 0.0, cy = 0.0, radius = 0.0, z0 = 0.0, height = 0.0;
};

struct MaterialValues {
  double eps_r = 1.0, mu_r = 1.0, sigma = 0.0, rho = 0.0;
};

inline std::array<double, 3> cell_center(const GridSpec& g, int i, int j, int k) {
  return {(i + 0.5) * g.h[0], (j + 0.5) * g.h[1], (k + 0.5) * g.h[2]};
}

template <class Pred>
std::size_t paint_cells(MaterialGrid& m, const GridSpec& g, const MaterialValues& v, Pred inside) {
  std::size_t count = 0;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        if (!inside(cell_center(g, i, j, k))) continue;
        const std::size_t c = m.cell(i, j, k);
        m.eps_r[c] = v.eps_r;
        m.mu_r[c] = v.mu_r;
        m.sigma_e[c] = v.sigma;
        m.rho[c] = v.rho;
        ++count;
      }
  return count;
}

inline std::size_t paint_box(MaterialGrid& m, const GridSpec& g, const BoxRegion& b, const MaterialValues& v) {
  return paint_cells(m, g, v, [&](const std::array<double, 3>& p) {
    for (int a = 0; a < 3; ++a)
      if (p[a] < b.lo[a] || p[a] > b.hi[a]) return false;
    return true;
  });
}

inline std::size_t paint_cylinder(MaterialGrid& m, const GridSpec& g, const CylinderRegion& c, const MaterialValues& v) {
  return paint_cells(m, g, v, [&](const std::array<double, 3>& p) {
    const double dx = p[0] - c.cx, dy = p[1] - c.cy;
    return dx * dx + dy * dy <= c.radius * c.radius && p[2] >= c.z0 && p[2] <= c.z0 + c.height;
  });
}

/// Reads per-cell overrides from CSV rows "i,j,k,eps_r,mu_r,sigma,rho".
/// Blank lines, '#' comments and a non-numeric header row are skipped.
inline std::size_t load_voxel_csv(MaterialGrid& m, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open voxel file '" + path + "'");
  std::string line;
  std::size_t lineno = 0, count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    long i, j, k;
    double eps, mu, sigma, rho;
    if (!(ss >> i >> j >> k >> eps >> mu >> sigma >> rho)) {
      if (lineno == 1) continue;
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected i,j,k,eps_r,mu_r,sigma,rho");
    }
    if (i < 0 || j < 0 || k < 0 || i >= m.n[0] || j >= m.n[1] || k >= m.n[2])
      throw ConfigError(path + ":" + std::to_string(lineno) + ": voxel index out of range");
    const std::size_t c = m.cell(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k));
    m.eps_r[c] = eps;
    m.mu_r[c] = mu;
    m.sigma_e[c] = sigma;
    m.rho[c] = rho;
    ++count;
  }
  return count;
}

} // namespace sbpfdtd
