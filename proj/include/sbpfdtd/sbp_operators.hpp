#pragma once

// One-dimensional summation-by-parts operator pairs on the staggered
// Plus/Minus grids. Everything in three dimensions is assembled from these.
//
//   Plus  grid, n cells: n+1 nodes at 0, h, 2h, ..., nh
//   Minus grid, n cells: n+2 nodes at 0, h/2, 3h/2, ..., (n-1/2)h, nh
//
// d_plus maps Minus-grid values to a derivative on the Plus grid and d_minus
// maps Plus-grid values to the Minus grid. With q = p * d the pair satisfies
// q_plus + q_minus^T = B, B = diag-corner(-1, +1).

#include "sbpfdtd/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace sbpfdtd {

enum class NodeKind { Plus, Minus };

constexpr NodeKind flip(NodeKind k) noexcept {
  return k == NodeKind::Plus ? NodeKind::Minus : NodeKind::Plus;
}

constexpr int node_count(NodeKind kind, int n_cells) noexcept {
  return kind == NodeKind::Plus ? n_cells + 1 : n_cells + 2;
}

/// Physical coordinate of node `index` on a grid starting at 0.
inline double node_coordinate(NodeKind kind, int index, int n_cells, double h) noexcept {
  if (kind == NodeKind::Plus) return index * h;
  if (index == 0) return 0.0;
  if (index == n_cells + 1) return n_cells * h;
  return (index - 0.5) * h;
}

/// One row of a banded difference operator: `width` consecutive source
/// entries starting at column `first`.
struct StencilRow {
  int first = 0;
  int width = 0;
  std::array<double, 3> w{};
};

struct SbpOperatorPair {
  int n_cells = 0;
  double h = 0.0;
  std::vector<StencilRow> d_plus;  // n+1 rows, reads n+2 Minus values
  std::vector<StencilRow> d_minus; // n+2 rows, reads n+1 Plus values
  std::vector<double> p_plus;      // n+1 norm weights (include h)
  std::vector<double> p_minus;     // n+2 norm weights (include h)

  /// Rows of the operator whose output lives on `target`.
  const std::vector<StencilRow>& rows(NodeKind target) const noexcept {
    return target == NodeKind::Plus ? d_plus : d_minus;
  }
  const std::vector<double>& weights(NodeKind kind) const noexcept {
    return kind == NodeKind::Plus ? p_plus : p_minus;
  }
  /// Half-open row range [begin, end) that uses the plain two-point stencil.
  static constexpr int interior_begin(NodeKind target) noexcept { return target == NodeKind::Plus ? 2 : 3; }
  int interior_end(NodeKind) const noexcept { return n_cells - 1; }
  /// Offset of the first source column relative to the row index in the interior.
  static constexpr int interior_offset(NodeKind target) noexcept {
    return target == NodeKind::Plus ? 0 : -1;
  }
};

namespace detail {

// Unscaled (h = 1) boundary closures. Q rows are dyadic and therefore exact;
// D rows are Q rows divided by the norm weight.
struct ClosureRow {
  int first;
  int width;
  std::array<double, 3> q;
};

inline StencilRow make_row(const ClosureRow& c, double weight, double h) {
  StencilRow r;
  r.first = c.first;
  r.width = c.width;
  for (int m = 0; m < c.width; ++m) r.w[m] = c.q[m] / (weight * h);
  return r;
}

} // namespace detail

inline SbpOperatorPair build_sbp_pair(int n_cells, double h) {
  if (n_cells < 4) throw ConfigError("grid too small for boundary closure");
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("grid spacing must be positive");
  const int n = n_cells;

  SbpOperatorPair op;
  op.n_cells = n;
  op.h = h;

  // Norm weights.
  op.p_plus.assign(n + 1, h);
  op.p_plus.front() = op.p_plus.back() = 0.5 * h;
  op.p_minus.assign(n + 2, h);
  op.p_minus[0] = op.p_minus[n + 1] = 0.5 * h;
  op.p_minus[1] = op.p_minus[n] = 0.25 * h;
  op.p_minus[2] = op.p_minus[n - 1] = 1.25 * h;

  using detail::ClosureRow;
  using detail::make_row;

  // q_plus closures.
  const std::array<ClosureRow, 2> qp_top{{{0, 3, {-0.5, 0.25, 0.25}}, {0, 3, {-0.5, -0.25, 0.75}}}};
  const std::array<ClosureRow, 2> qp_bot{
      {{n - 1, 3, {-0.75, 0.25, 0.5}}, {n - 1, 3, {-0.25, -0.25, 0.5}}}};

  op.d_plus.resize(n + 1);
  op.d_plus[0] = make_row(qp_top[0], 0.5, h);
  op.d_plus[1] = make_row(qp_top[1], 1.0, h);
  for (int r = 2; r <= n - 2; ++r) op.d_plus[r] = make_row({r, 2, {-1.0, 1.0, 0.0}}, 1.0, h);
  op.d_plus[n - 1] = make_row(qp_bot[0], 1.0, h);
  op.d_plus[n] = make_row(qp_bot[1], 0.5, h);

  // q_minus closures.
  op.d_minus.resize(n + 2);
  op.d_minus[0] = make_row({0, 2, {-0.5, 0.5, 0.0}}, 0.5, h);
  op.d_minus[1] = make_row({0, 2, {-0.25, 0.25, 0.0}}, 0.25, h);
  op.d_minus[2] = make_row({0, 3, {-0.25, -0.75, 1.0}}, 1.25, h);
  for (int r = 3; r <= n - 2; ++r) op.d_minus[r] = make_row({r - 1, 2, {-1.0, 1.0, 0.0}}, 1.0, h);
  op.d_minus[n - 1] = make_row({n - 2, 3, {-1.0, 0.75, 0.25}}, 1.25, h);
  op.d_minus[n] = make_row({n - 1, 2, {-0.25, 0.25, 0.0}}, 0.25, h);
  op.d_minus[n + 1] = make_row({n - 1, 2, {-0.5, 0.5, 0.0}}, 0.5, h);
  return op;
}

/// Applies the operator producing values on `target` (d_plus for Plus,
/// d_minus for Minus) row by row.
template <class T>
std::vector<T> apply_d(const SbpOperatorPair& op, NodeKind target, std::span<const T> values) {
  const int n_in = node_count(flip(target), op.n_cells);
  if (static_cast<int>(values.size()) != n_in)
    throw DimensionError("apply_d: expected " + std::to_string(n_in) + " values, got " +
                         std::to_string(values.size()));
  const auto& rows = op.rows(target);
  std::vector<T> out(rows.size(), T{});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    T acc{};
    for (int m = 0; m < rows[r].width; ++m) acc += rows[r].w[m] * values[rows[r].first + m];
    out[r] = acc;
  }
  return out;
}

template <class T>
std::vector<T> apply_d(const SbpOperatorPair& op, NodeKind target, const std::vector<T>& values) {
  return apply_d(op, target, std::span<const T>(values));
}

inline Eigen::MatrixXd assemble_dense(const SbpOperatorPair& op, NodeKind target) {
  const auto& rows = op.rows(target);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                            node_count(flip(target), op.n_cells));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int m = 0; m < rows[r].width; ++m) d(static_cast<Eigen::Index>(r), rows[r].first + m) = rows[r].w[m];
  return d;
}

/// Diagonal norm matrix of one grid kind.
inline Eigen::MatrixXd norm_matrix(const SbpOperatorPair& op, NodeKind kind) {
  const auto& w = op.weights(kind);
  return Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())).asDiagonal();
}

struct SbpReport {
  int n_cells = 0;
  double identity_residual = 0.0;
  /// d_plus k=0, d_plus k=1, d_minus k=0, d_minus k=1.
  std::array<double, 4> accuracy_residuals{};
  bool passed = false;
  static constexpr double tolerance = 1e-13;
};

inline SbpReport verify_sbp(const SbpOperatorPair& op) {
  SbpReport rep;
  rep.n_cells = op.n_cells;
  const int n = op.n_cells;
  const Eigen::MatrixXd qp = norm_matrix(op, NodeKind::Plus) * assemble_dense(op, NodeKind::Plus);
  const Eigen::MatrixXd qm = norm_matrix(op, NodeKind::Minus) * assemble_dense(op, NodeKind::Minus);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n + 1, n + 2);
  b(0, 0) = -1.0;
  b(n, n + 1) = 1.0;
  rep.identity_residual = (qp + qm.transpose() - b).cwiseAbs().maxCoeff();

  auto coords = [&](NodeKind k) {
    std::vector<double> x(static_cast<std::size_t>(node_count(k, n)));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = node_coordinate(k, static_cast<int>(i), n, op.h);
    return x;
  };
  auto residual = [&](NodeKind target, bool linear) {
    const NodeKind src = flip(target);
    std::vector<double> v = linear ? coords(src) : std::vector<double>(static_cast<std::size_t>(node_count(src, n)), 1.0);
    const auto d = apply_d(op, target, v);
    double r = 0.0;
    for (double x : d) r = std::max(r, std::abs(x - (linear ? 1.0 : 0.0)));
    return r;
  };
  rep.accuracy_residuals = {residual(NodeKind::Plus, false), residual(NodeKind::Plus, true),
                            residual(NodeKind::Minus, false), residual(NodeKind::Minus, true)};
  rep.passed = rep.identity_residual <= SbpReport::tolerance &&
               std::ranges::all_of(rep.accuracy_residuals, [](double r) { return r <= SbpReport::tolerance; });
  return rep;
}

} // namespace sbpfdtd
