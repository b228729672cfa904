#pragma once

// Dense reference assembly of the semi-discrete operator: Kronecker
// products of the 1D difference matrices plus penalty terms written with
// restriction and norm matrices. Used as an oracle for the matrix-free
// kernels; only practical for grids of a few cells per axis.

#include "sbpfdtd/diagnostics.hpp"
#include "sbpfdtd/grid.hpp"
#include "sbpfdtd/materials.hpp"
#include "sbpfdtd/sat.hpp"
#include "sbpfdtd/sbp_operators.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <array>
#include <complex>

namespace sbpfdtd {

struct DenseSystem {
  GridSpec grid;
  std::array<Eigen::Index, 6> offset{}; // E blocks offset in E space, H blocks in H space
  std::array<Eigen::Index, 6> size{};
  Eigen::Index n_e = 0, n_h = 0;
  Eigen::MatrixXcd k_e; // n_e x n_h: difference + penalty terms of the E equation
  Eigen::MatrixXcd k_h; // n_h x n_e: same for H
  Eigen::VectorXd w_e, w_h;     // tensor-product norm weights
  Eigen::VectorXd eps, mu;      // node material values
};

namespace detail {

inline Eigen::MatrixXd kron3(const Eigen::MatrixXd& fz, const Eigen::MatrixXd& fy, const Eigen::MatrixXd& fx) {
  const Eigen::MatrixXd zy = Eigen::kroneckerProduct(fz, fy).eval();
  return Eigen::kroneckerProduct(zy, fx).eval();
}

// Dense Kronecker form of the derivative along `axis` mapping a field on
// `src` to the layout with that axis flipped.
inline Eigen::MatrixXd kron_derivative(const NodeLayout& src, int axis, const std::array<SbpOperatorPair, 3>& pairs) {
  std::array<Eigen::MatrixXd, 3> f;
  for (int a = 0; a < 3; ++a)
    f[a] = a == axis ? assemble_dense(pairs[a], flip(src.kinds[a])) : Eigen::MatrixXd::Identity(src.dims[a], src.dims[a]);
  return kron3(f[2], f[1], f[0]);
}

// Selection of the nodes of `l` lying on a face, transverse order with the
// lower axis fastest.
inline Eigen::MatrixXd restriction(const NodeLayout& l, Face face) {
  const int c = face_axis(face);
  std::array<Eigen::MatrixXd, 3> f;
  for (int a = 0; a < 3; ++a) {
    if (a == c) {
      f[a] = Eigen::MatrixXd::Zero(1, l.dims[a]);
      f[a](0, face_is_high(face) ? l.dims[a] - 1 : 0) = 1.0;
    } else {
      f[a] = Eigen::MatrixXd::Identity(l.dims[a], l.dims[a]);
    }
  }
  return kron3(f[2], f[1], f[0]);
}

// Transverse norm weights on a face.
inline Eigen::VectorXd face_weights(const NodeLayout& l, int c, const std::array<SbpOperatorPair, 3>& pairs) {
  std::array<Eigen::MatrixXd, 3> f;
  for (int a = 0; a < 3; ++a) {
    if (a == c) {
      f[a] = Eigen::MatrixXd::Ones(1, 1);
    } else {
      const auto& w = pairs[a].weights(l.kinds[a]);
      f[a] = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    }
  }
  return kron3(f[2], f[1], f[0]);
}

inline Eigen::VectorXd layout_weights(const NodeLayout& l, const std::array<SbpOperatorPair, 3>& pairs) {
  const auto w = norm_weights(l, pairs);
  return Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
}

} // namespace detail

inline DenseSystem assemble_reference(const GridSpec& g, const MaterialGrid& m, const SatConfig& sat) {
  g.validate();
  const auto pairs = build_pairs(g);
  DenseSystem s;
  s.grid = g;
  std::array<ComponentLayout, 6> lay;
  Eigen::Index oe = 0, oh = 0;
  for (Component c : all_components) {
    const int ci = static_cast<int>(c);
    lay[ci] = layout_for(g, c);
    s.size[ci] = static_cast<Eigen::Index>(lay[ci].size());
    s.offset[ci] = is_electric(c) ? oe : oh;
    (is_electric(c) ? oe : oh) += s.size[ci];
  }
  s.n_e = oe;
  s.n_h = oh;
  s.k_e = Eigen::MatrixXcd::Zero(s.n_e, s.n_h);
  s.k_h = Eigen::MatrixXcd::Zero(s.n_h, s.n_e);
  s.w_e.resize(s.n_e);
  s.w_h.resize(s.n_h);
  s.eps.resize(s.n_e);
  s.mu.resize(s.n_h);

  for (Component c : all_components) {
    const int ci = static_cast<int>(c);
    const ComponentLayout& l = lay[ci];
    Eigen::VectorXd w = detail::layout_weights(l, pairs);
    Eigen::VectorXd mat(s.size[ci]);
    Eigen::Index idx = 0;
    for (int k = 0; k < l.dims[2]; ++k)
      for (int j = 0; j < l.dims[1]; ++j)
        for (int i = 0; i < l.dims[0]; ++i, ++idx) {
          const NodeMaterial nm = sample_material(m, c, i, j, k);
          mat[idx] = is_electric(c) ? nm.eps : nm.mu;
        }
    if (is_electric(c)) {
      s.w_e.segment(s.offset[ci], s.size[ci]) = w;
      s.eps.segment(s.offset[ci], s.size[ci]) = mat;
    } else {
      s.w_h.segment(s.offset[ci], s.size[ci]) = w;
      s.mu.segment(s.offset[ci], s.size[ci]) = mat;
    }
  }

  auto block_e = [&](Component e, Component h) {
    return s.k_e.block(s.offset[static_cast<int>(e)], s.offset[static_cast<int>(h)], s.size[static_cast<int>(e)],
                       s.size[static_cast<int>(h)]);
  };
  auto block_h = [&](Component h, Component e) {
    return s.k_h.block(s.offset[static_cast<int>(h)], s.offset[static_cast<int>(e)], s.size[static_cast<int>(h)],
                       s.size[static_cast<int>(e)]);
  };

  // Curl terms.
  for (int a = 0; a < 3; ++a) {
    const int a1 = (a + 1) % 3, a2 = (a + 2) % 3;
    block_e(electric(a), magnetic(a2)) += detail::kron_derivative(lay[3 + a2], a1, pairs).cast<std::complex<double>>();
    block_e(electric(a), magnetic(a1)) -= detail::kron_derivative(lay[3 + a1], a2, pairs).cast<std::complex<double>>();
    block_h(magnetic(a), electric(a1)) += detail::kron_derivative(lay[a1], a2, pairs).cast<std::complex<double>>();
    block_h(magnetic(a), electric(a2)) -= detail::kron_derivative(lay[a2], a1, pairs).cast<std::complex<double>>();
  }

  // Penalties: P_out^{-1} R_out^T P_face coef (R_in - phase R_in(opposite)).
  for (Face f : all_faces) {
    const int c = face_axis(f);
    const bool per = sat.at(f) == BoundaryType::Periodic;
    const std::complex<double> ph = per ? bloch_factor<std::complex<double>>(sat, f) : std::complex<double>{};
    for (int slot = 0; slot < 2; ++slot) {
      const int a = slot_axis(f, slot), b = partner_axis(a, c);
      const ComponentLayout& le = lay[a];
      const ComponentLayout& lh = lay[3 + b];
      const Eigen::VectorXd pf = detail::face_weights(le, c, pairs);
      const Eigen::VectorXd we = detail::layout_weights(le, pairs);
      const Eigen::VectorXd wh = detail::layout_weights(lh, pairs);
      const Eigen::MatrixXd re = detail::restriction(le, f), rh = detail::restriction(lh, f);
      const Eigen::MatrixXd re_o = detail::restriction(le, opposite(f)), rh_o = detail::restriction(lh, opposite(f));

      if (const double sg = sat.sigma_at(f, slot); sg != 0.0) {
        const Eigen::MatrixXd lift = wh.cwiseInverse().asDiagonal() * rh.transpose() * pf.asDiagonal();
        Eigen::MatrixXcd pen = (sg * lift * re).cast<std::complex<double>>();
        if (per) pen -= ph * (sg * lift * re_o).cast<std::complex<double>>();
        block_h(magnetic(b), electric(a)) += pen;
      }
      if (const double ch = sat.chi_at(f, slot); ch != 0.0) {
        const Eigen::MatrixXd lift = we.cwiseInverse().asDiagonal() * re.transpose() * pf.asDiagonal();
        Eigen::MatrixXcd pen = (ch * lift * rh).cast<std::complex<double>>();
        if (per) pen -= ph * (ch * lift * rh_o).cast<std::complex<double>>();
        block_e(electric(a), magnetic(b)) += pen;
      }
    }
  }
  return s;
}

/// One leapfrog step on the stacked state [E; H] of a lossless medium:
/// H' = H + dt mu^{-1} K_h E, E' = E + dt eps^{-1} K_e H'.
inline Eigen::MatrixXcd reference_one_step(const DenseSystem& s, double dt) {
  const Eigen::MatrixXcd ae = s.eps.cwiseInverse().cast<std::complex<double>>().asDiagonal() * s.k_e;
  const Eigen::MatrixXcd ah = s.mu.cwiseInverse().cast<std::complex<double>>().asDiagonal() * s.k_h;
  const Eigen::Index n = s.n_e + s.n_h;
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Identity(n, n);
  L.topLeftCorner(s.n_e, s.n_e) += dt * dt * ae * ah;
  L.topRightCorner(s.n_e, s.n_h) = dt * ae;
  L.bottomLeftCorner(s.n_h, s.n_e) = dt * ah;
  return L;
}

/// Relative size of the weighted symmetric part of the spatial operator:
/// max |W_e K_e + (W_h K_h)^H| / max |W_e K_e|. Zero means the
/// semi-discrete energy is exactly conserved.
inline double energy_rate_residual(const DenseSystem& s) {
  const Eigen::MatrixXcd me = s.w_e.cast<std::complex<double>>().asDiagonal() * s.k_e;
  const Eigen::MatrixXcd mh = s.w_h.cast<std::complex<double>>().asDiagonal() * s.k_h;
  const double scale = std::max(me.cwiseAbs().maxCoeff(), mh.cwiseAbs().maxCoeff());
  return (me + mh.adjoint()).cwiseAbs().maxCoeff() / scale;
}

} // namespace sbpfdtd
