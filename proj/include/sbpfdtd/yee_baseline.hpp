#pragma once

// Conventional Yee FDTD kernel on Yee-dimension arrays with PEC walls
// (tangential E on the boundary held at zero). Used as the reference for
// memory and runtime overhead measurements; same per-node coefficient
// arrays and loop structure as the SBP-SAT solver.

#include "sbpfdtd/grid.hpp"
#include "sbpfdtd/materials.hpp"
#include "sbpfdtd/sources.hpp"

#include <array>
#include <vector>

namespace sbpfdtd {

class YeeSolver {
public:
  YeeSolver(const GridSpec& g, const MaterialGrid& m, double dt, int threads = 1) : g_(g), dt_(dt), threads_(threads) {
    g.validate();
    for (Component c : all_components) {
      const int ci = static_cast<int>(c);
      const auto kinds = axis_kinds(c);
      for (int a = 0; a < 3; ++a) dims_[ci][a] = kinds[a] == NodeKind::Plus ? g.n[a] + 1 : g.n[a];
      data_[ci].assign(size(c), 0.0);
      coef_a_[ci].assign(size(c), 1.0);
      coef_b_[ci].assign(size(c), 0.0);
      // Yee Minus index m sits at SBP Minus index m + 1.
      for (int k = 0; k < dims_[ci][2]; ++k)
        for (int j = 0; j < dims_[ci][1]; ++j)
          for (int i = 0; i < dims_[ci][0]; ++i) {
            const std::array<int, 3> y{i, j, k};
            std::array<int, 3> s{};
            for (int a = 0; a < 3; ++a) s[a] = kinds[a] == NodeKind::Plus ? y[a] : y[a] + 1;
            const NodeMaterial nm = sample_material(m, c, s[0], s[1], s[2]);
            const std::size_t idx = index(c, i, j, k);
            if (is_electric(c)) {
              const double loss = nm.sigma * dt / (2.0 * nm.eps);
              coef_a_[ci][idx] = (1.0 - loss) / (1.0 + loss);
              coef_b_[ci][idx] = (dt / nm.eps) / (1.0 + loss);
            } else {
              coef_b_[ci][idx] = dt / nm.mu;
            }
          }
    }
  }

  std::size_t size(Component c) const noexcept {
    const auto& d = dims_[static_cast<int>(c)];
    return static_cast<std::size_t>(d[0]) * static_cast<std::size_t>(d[1]) * static_cast<std::size_t>(d[2]);
  }
  std::size_t total_size() const noexcept {
    std::size_t s = 0;
    for (Component c : all_components) s += size(c);
    return s;
  }
  std::size_t index(Component c, int i, int j, int k) const noexcept {
    const auto& d = dims_[static_cast<int>(c)];
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(d[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(d[1]) * static_cast<std::size_t>(k));
  }
  std::vector<double>& data(Component c) noexcept { return data_[static_cast<int>(c)]; }
  const std::array<int, 3>& dims(Component c) const noexcept { return dims_[static_cast<int>(c)]; }

  void add_source(const SourceSpec& s) { sources_.push_back(s); }

  void step() {
    update_h();
    update_e((step_ + 0.5) * dt_);
    ++step_;
  }

  void update_h() {
    const double idx_ = 1.0 / g_.h[0], idy = 1.0 / g_.h[1], idz = 1.0 / g_.h[2];
    // Hx += db * (dEy/dz - dEz/dy)
    h_kernel(Component::Hx, Component::Ey, 2, idz, Component::Ez, 1, idy);
    // Hy += db * (dEz/dx - dEx/dz)
    h_kernel(Component::Hy, Component::Ez, 0, idx_, Component::Ex, 2, idz);
    // Hz += db * (dEx/dy - dEy/dx)
    h_kernel(Component::Hz, Component::Ex, 1, idy, Component::Ey, 0, idx_);
  }

  void update_e(double t) {
    const double idx_ = 1.0 / g_.h[0], idy = 1.0 / g_.h[1], idz = 1.0 / g_.h[2];
    e_kernel(Component::Ex, Component::Hz, 1, idy, Component::Hy, 2, idz);
    e_kernel(Component::Ey, Component::Hx, 2, idz, Component::Hz, 0, idx_);
    e_kernel(Component::Ez, Component::Hy, 0, idx_, Component::Hx, 1, idy);
    for (const SourceSpec& s : sources_) {
      const double v = waveform_value(s, t);
      const int ci = static_cast<int>(s.target.component);
      const auto kinds = axis_kinds(s.target.component);
      std::array<int, 3> y = s.target.lo;
      for (int a = 0; a < 3; ++a)
        if (kinds[a] == NodeKind::Minus) y[a] -= 1;
      const std::size_t idx = index(s.target.component, y[0], y[1], y[2]);
      data_[ci][idx] += coef_b_[ci][idx] * v;
    }
  }

private:
  std::size_t stride(Component c, int axis) const noexcept {
    const auto& d = dims_[static_cast<int>(c)];
    return axis == 0 ? 1 : (axis == 1 ? static_cast<std::size_t>(d[0]) : static_cast<std::size_t>(d[0]) * static_cast<std::size_t>(d[1]));
  }

  // out += db * ((p[+1] - p[0]) * cp - (q[+1] - q[0]) * cq), forward differences.
  void h_kernel(Component out, Component p, int pa, double cp, Component q, int qa, double cq) {
    const int co = static_cast<int>(out);
    const auto& d = dims_[co];
    double* o = data_[co].data();
    const double* db = coef_b_[co].data();
    const double* ps = data_[static_cast<int>(p)].data();
    const double* qs = data_[static_cast<int>(q)].data();
    const std::size_t sp = stride(p, pa), sq = stride(q, qa);
    const int nx = d[0];
#pragma omp parallel for schedule(static) num_threads(threads_) if (threads_ > 1)
    for (int k = 0; k < d[2]; ++k)
      for (int j = 0; j < d[1]; ++j) {
        const std::size_t bo = index(out, 0, j, k);
        const double* p0 = ps + index(p, 0, j, k);
        const double* p1 = p0 + sp;
        const double* q0 = qs + index(q, 0, j, k);
        const double* q1 = q0 + sq;
        double* op = o + bo;
        const double* dbp = db + bo;
        for (int i = 0; i < nx; ++i) op[i] += dbp[i] * ((p1[i] - p0[i]) * cp - (q1[i] - q0[i]) * cq);
      }
  }

  // out = ca*out + cb*((p[0] - p[-1]) * cp - (q[0] - q[-1]) * cq) on nodes
  // not lying on a wall; tangential E on walls stays zero.
  void e_kernel(Component out, Component p, int pa, double cp, Component q, int qa, double cq) {
    const int co = static_cast<int>(out);
    const int a = component_axis(out);
    const auto& d = dims_[co];
    double* o = data_[co].data();
    const double* ca = coef_a_[co].data();
    const double* cb = coef_b_[co].data();
    const double* ps = data_[static_cast<int>(p)].data();
    const double* qs = data_[static_cast<int>(q)].data();
    const std::size_t sp = stride(p, pa), sq = stride(q, qa);
    const int ilo = a == 0 ? 0 : 1, ihi = a == 0 ? d[0] : d[0] - 1;
    const int jlo = a == 1 ? 0 : 1, jhi = a == 1 ? d[1] : d[1] - 1;
    const int klo = a == 2 ? 0 : 1, khi = a == 2 ? d[2] : d[2] - 1;
#pragma omp parallel for schedule(static) num_threads(threads_) if (threads_ > 1)
    for (int k = klo; k < khi; ++k)
      for (int j = jlo; j < jhi; ++j) {
        const std::size_t bo = index(out, 0, j, k);
        // H is one node shorter along the differenced axis: the node behind
        // E is the same (i, j, k) minus one stride.
        const double* p1 = ps + index(p, 0, j, k);
        const double* p0 = p1 - sp;
        const double* q1 = qs + index(q, 0, j, k);
        const double* q0 = q1 - sq;
        double* op = o + bo;
        const double* cap = ca + bo;
        const double* cbp = cb + bo;
        for (int i = ilo; i < ihi; ++i) op[i] = cap[i] * op[i] + cbp[i] * ((p1[i] - p0[i]) * cp - (q1[i] - q0[i]) * cq);
      }
  }

  GridSpec g_;
  double dt_;
  int threads_;
  std::array<std::array<int, 3>, 6> dims_{};
  std::array<std::vector<double>, 6> data_, coef_a_, coef_b_;
  std::vector<SourceSpec> sources_;
  long step_ = 0;
};

} // namespace sbpfdtd
