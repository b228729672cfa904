#pragma once

// Leapfrog time stepping of the SBP-SAT semi-discrete Maxwell system.
//
// State: E at step n and H at step n-1/2. update_h advances H to n+1/2
// using E^n (including the sigma penalties), update_e advances E to n+1
// using H^{n+1/2} (including the chi penalties and sources). The curl
// kernels sweep x-lines and fuse both derivative terms with the material
// update; closure rows use a padded three-point form. Boundary penalties
// are added line by line inside the same sweep.

#include "sbpfdtd/error.hpp"
#include "sbpfdtd/grid.hpp"
#include "sbpfdtd/materials.hpp"
#include "sbpfdtd/sat.hpp"
#include "sbpfdtd/sbp_operators.hpp"
#include "sbpfdtd/sources.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sbpfdtd {

inline double cfl_max_dt(const GridSpec& g, double wave_speed) {
  const double s = 1.0 / (g.h[0] * g.h[0]) + 1.0 / (g.h[1] * g.h[1]) + 1.0 / (g.h[2] * g.h[2]);
  return 1.0 / (wave_speed * std::sqrt(s));
}

inline double cfl_max_dt(const GridSpec& g, const MaterialGrid& m) { return cfl_max_dt(g, m.max_wave_speed()); }

struct SolverOptions {
  int threads = 1;
};

namespace detail {

// Stencil row with exactly three reads; two-point rows are padded with a
// zero weight so that every read stays inside the source line.
struct Row3 {
  int first = 0;
  double w0 = 0.0, w1 = 0.0, w2 = 0.0;
  bool diff = false; // interior row: w0 = -w1, w2 = 0
};

inline std::vector<Row3> pad_rows(const std::vector<StencilRow>& rows, int src_len) {
  std::vector<Row3> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::array<double, 3> w{};
    int first = rows[r].first;
    for (int m = 0; m < rows[r].width; ++m) w[m] = rows[r].w[m];
    if (first + 2 >= src_len) {
      first -= 1;
      w = {0.0, w[0], w[1]};
    }
    out[r] = {first, w[0], w[1], w[2], rows[r].width == 2 && w[2] == 0.0 && w[0] == -w[1]};
  }
  return out;
}

} // namespace detail

template <class T>
class Solver {
public:
  Solver(const GridSpec& grid, const MaterialGrid& materials, const SatConfig& sat, double dt, SolverOptions opt = {})
      : grid_(grid), sat_(sat), dt_(dt), opt_(opt), fields_(grid) {
    grid.validate();
    if (materials.n != grid.n) throw DimensionError("material grid does not match the field grid");
    materials.validate();
    sat.validate(FieldSet<T>::scalar_mode());
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    for (int a = 0; a < 3; ++a) {
      pairs_[a] = build_sbp_pair(grid.n[a], grid.h[a]);
      rows_[a][0] = detail::pad_rows(pairs_[a].d_plus, node_count(NodeKind::Minus, grid.n[a]));
      rows_[a][1] = detail::pad_rows(pairs_[a].d_minus, node_count(NodeKind::Plus, grid.n[a]));
    }
    build_coefficients(materials);
    build_penalties();
  }

  const GridSpec& grid() const noexcept { return grid_; }
  const SatConfig& sat() const noexcept { return sat_; }
  double dt() const noexcept { return dt_; }
  long step_count() const noexcept { return step_; }
  double time() const noexcept { return step_ * dt_; }
  const SbpOperatorPair& pair(int axis) const noexcept { return pairs_[axis]; }
  FieldSet<T>& fields() noexcept { return fields_; }
  const FieldSet<T>& fields() const noexcept { return fields_; }

  /// Permittivity and permeability per node, as used by the update.
  const std::vector<double>& node_eps(int axis) const noexcept { return eps_[axis]; }
  const std::vector<double>& node_mu(int axis) const noexcept { return mu_[axis]; }

  void add_source(const SourceSpec& s) {
    s.validate(grid_);
    sources_.push_back(s);
  }
  void clear_sources() { sources_.clear(); }

  void update_h() {
    for (int b = 0; b < 3; ++b) curl_update(magnetic(b));
  }

  /// `t` is the time at which source waveforms are evaluated.
  void update_e(double t) {
    for (int a = 0; a < 3; ++a) curl_update(electric(a));
    apply_sources(t);
  }

  void step() {
    update_h();
    update_e((step_ + 0.5) * dt_);
    ++step_;
  }

  void set_step_count(long n) noexcept { step_ = n; }

private:
  struct LineTerm {
    const T* src = nullptr;
    const NodeLayout* lay = nullptr;
    int axis = 0;
    double sign = 1.0;
    const std::vector<detail::Row3>* rows = nullptr;
  };

  // One SAT term landing on a component: on the face `out_n` along `axis`,
  // out += coef_b * coef * (src(in_n) - phase * src(in_opp)).
  struct Penalty {
    int axis = 0;
    int out_n = 0;
    Component src = Component::Ex;
    int in_n = 0, in_opp = 0;
    double coef = 0.0;
    bool periodic = false;
    T phase{};
  };

  const std::vector<detail::Row3>& rows_for(int axis, NodeKind target) const {
    return rows_[axis][target == NodeKind::Plus ? 0 : 1];
  }

  void build_coefficients(const MaterialGrid& m) {
    for (int a = 0; a < 3; ++a) {
      const Component ce = electric(a), ch = magnetic(a);
      const NodeLayout& le = fields_[ce].layout;
      const NodeLayout& lh = fields_[ch].layout;
      ca_[a].resize(le.size());
      cb_[a].resize(le.size());
      eps_[a].resize(le.size());
      for (int k = 0; k < le.dims[2]; ++k)
        for (int j = 0; j < le.dims[1]; ++j)
          for (int i = 0; i < le.dims[0]; ++i) {
            const NodeMaterial nm = sample_material(m, ce, i, j, k);
            const double loss = nm.sigma * dt_ / (2.0 * nm.eps);
            const std::size_t idx = le.index(i, j, k);
            ca_[a][idx] = (1.0 - loss) / (1.0 + loss);
            cb_[a][idx] = (dt_ / nm.eps) / (1.0 + loss);
            eps_[a][idx] = nm.eps;
          }
      db_[a].resize(lh.size());
      mu_[a].resize(lh.size());
      for (int k = 0; k < lh.dims[2]; ++k)
        for (int j = 0; j < lh.dims[1]; ++j)
          for (int i = 0; i < lh.dims[0]; ++i) {
            const NodeMaterial nm = sample_material(m, ch, i, j, k);
            const std::size_t idx = lh.index(i, j, k);
            db_[a][idx] = dt_ / nm.mu;
            mu_[a][idx] = nm.mu;
          }
    }
  }

  // out = ca*out + cb*curl (electric) or out += db*curl (magnetic) for one
  // component. The curl has one in-line x term when the component is not
  // along x, and one or two terms that combine whole x-lines.
  void curl_update(Component comp) {
    const bool is_e = is_electric(comp);
    const int a = component_axis(comp);
    const int a1 = (a + 1) % 3, a2 = (a + 2) % 3;
    Field<T>& out = fields_[comp];
    const NodeLayout& lo = out.layout;

    // Electric: D_{a1} H_{a2} - D_{a2} H_{a1}. Magnetic: D_{a2} E_{a1} - D_{a1} E_{a2}.
    std::array<LineTerm, 2> terms;
    if (is_e) {
      terms[0] = make_term(magnetic(a2), a1, 1.0, NodeKind::Plus);
      terms[1] = make_term(magnetic(a1), a2, -1.0, NodeKind::Plus);
    } else {
      terms[0] = make_term(electric(a1), a2, 1.0, NodeKind::Minus);
      terms[1] = make_term(electric(a2), a1, -1.0, NodeKind::Minus);
    }
    // Put the x-derivative term (if any) last.
    if (terms[0].axis == 0) std::swap(terms[0], terms[1]);
    const bool has_x = terms[1].axis == 0;

    const double* ca = is_e ? ca_[a].data() : nullptr;
    const double* cb = is_e ? cb_[a].data() : db_[a].data();
    const int nj = lo.dims[1], nk = lo.dims[2], L = lo.dims[0];
    const std::vector<Penalty>& pens = penalties_[static_cast<int>(comp)];

#pragma omp parallel for schedule(static) num_threads(opt_.threads) if (opt_.threads > 1)
    for (int k = 0; k < nk; ++k)
      for (int j = 0; j < nj; ++j) {
        const std::size_t base = lo.index(0, j, k);
        T* o = out.data.data() + base;
        const double* cap = ca ? ca + base : nullptr;
        const double* cbp = cb + base;
        if (has_x)
          line_with_x(o, cap, cbp, L, terms[0], terms[1], j, k);
        else
          line_two(o, cap, cbp, L, terms[0], terms[1], j, k);
        if (!pens.empty()) line_penalties(o, cbp, L, pens, j, k);
      }
  }

  LineTerm make_term(Component src, int axis, double sign, NodeKind target) const {
    return {fields_[src].data.data(), &fields_[src].layout, axis, sign, &rows_for(axis, target)};
  }

  struct LinePtrs {
    const T* p0;
    const T* p1;
    const T* p2;
    double w0, w1, w2;
    bool diff;
  };

  static LinePtrs line_ptrs(const LineTerm& t, int j, int k) {
    const detail::Row3& r = (*t.rows)[t.axis == 1 ? j : k];
    std::array<int, 3> idx{0, j, k};
    idx[t.axis] = r.first;
    const T* p0 = t.src + t.lay->index(idx[0], idx[1], idx[2]);
    const std::size_t s = t.lay->stride(t.axis);
    return {p0, p0 + s, p0 + 2 * s, t.sign * r.w0, t.sign * r.w1, t.sign * r.w2, r.diff};
  }

  // Calls fn with a branch-free evaluator of the line term, so that every
  // row shape gets its own vectorizable loop.
  template <class Fn>
  static void with_term(const LinePtrs& p, Fn&& fn) {
    const T *p0 = p.p0, *p1 = p.p1, *p2 = p.p2;
    const double w0 = p.w0, w1 = p.w1, w2 = p.w2;
    if (p.diff)
      fn([=](int i) { return (p1[i] - p0[i]) * w1; });
    else
      fn([=](int i) { return w0 * p0[i] + w1 * p1[i] + w2 * p2[i]; });
  }

  template <class Curl>
  static void apply(T* o, const double* ca, const double* cb, int b, int e, Curl&& curl) {
    if (ca) {
      for (int i = b; i < e; ++i) o[i] = ca[i] * o[i] + cb[i] * curl(i);
    } else {
      for (int i = b; i < e; ++i) o[i] += cb[i] * curl(i);
    }
  }

  // Two line-combination terms (component along x).
  void line_two(T* o, const double* ca, const double* cb, int L, const LineTerm& t0, const LineTerm& t1, int j, int k) const {
    with_term(line_ptrs(t0, j, k), [&](auto fp) {
      with_term(line_ptrs(t1, j, k), [&](auto fq) { apply(o, ca, cb, 0, L, [&](int i) { return fp(i) + fq(i); }); });
    });
  }

  // One line-combination term plus the in-line x derivative.
  void line_with_x(T* o, const double* ca, const double* cb, int L, const LineTerm& tl, const LineTerm& tx, int j,
                   int k) const {
    const LinePtrs p = line_ptrs(tl, j, k);
    const NodeKind target = (tx.rows == &rows_[0][0]) ? NodeKind::Plus : NodeKind::Minus;
    const int xb = SbpOperatorPair::interior_begin(target);
    const int xe = pairs_[0].interior_end(target);
    const int off = SbpOperatorPair::interior_offset(target);
    const std::vector<detail::Row3>& xr = *tx.rows;
    const T* px = tx.src + tx.lay->index(0, j, k);
    const double sx = tx.sign;

    const double cx = sx * xr[xb].w1;
    const T* x0 = px + off;
    const T* x1 = px + off + 1;
    with_term(p, [&](auto fp) {
      auto closure = [&](int i) {
        const detail::Row3& r = xr[i];
        return fp(i) + sx * (r.w0 * px[r.first] + r.w1 * px[r.first + 1] + r.w2 * px[r.first + 2]);
      };
      apply(o, ca, cb, 0, xb, closure);
      apply(o, ca, cb, xb, xe, [&](int i) { return fp(i) + (x1[i] - x0[i]) * cx; });
      apply(o, ca, cb, xe, L, closure);
    });
  }

  // H_b on a face gets (dt/mu) * sigma / p_minus(boundary) * (E_a - phase * E_a(opposite)),
  // E_a gets cb * chi / p_plus(boundary) * (H_b - phase * H_b(opposite)). Lists
  // keep face then slot order so corner nodes sum their terms in a fixed order.
  void build_penalties() {
    for (Face f : all_faces) {
      const int c = face_axis(f);
      const bool high = face_is_high(f);
      const bool per = sat_.at(f) == BoundaryType::Periodic;
      const T ph = per ? bloch_factor<T>(sat_, f) : T{};
      for (int slot = 0; slot < 2; ++slot) {
        const int a = slot_axis(f, slot), b = partner_axis(a, c);
        for (const bool onto_h : {true, false}) {
          const double w = onto_h ? sat_.sigma_at(f, slot) : sat_.chi_at(f, slot);
          if (w == 0.0) continue;
          const Component out = onto_h ? magnetic(b) : electric(a);
          const Component src = onto_h ? electric(a) : magnetic(b);
          const double pw = onto_h ? pairs_[c].p_minus.front() : pairs_[c].p_plus.front();
          const int n_out = fields_[out].layout.dims[c], n_src = fields_[src].layout.dims[c];
          Penalty p;
          p.axis = c;
          p.out_n = high ? n_out - 1 : 0;
          p.src = src;
          p.in_n = high ? n_src - 1 : 0;
          p.in_opp = high ? 0 : n_src - 1;
          p.coef = w / pw;
          p.periodic = per;
          p.phase = ph;
          penalties_[static_cast<int>(out)].push_back(p);
        }
      }
    }
  }

  // Adds the penalties that touch the x-line (j, k) of the component being
  // updated. Runs right after that line's curl update, while it is in cache.
  void line_penalties(T* o, const double* cb, int L, const std::vector<Penalty>& pens, int j, int k) const {
    for (const Penalty& p : pens) {
      const Field<T>& src = fields_[p.src];
      const NodeLayout& ls = src.layout;
      if (p.axis == 0) {
        T v = src.data[ls.index(p.in_n, j, k)];
        if (p.periodic) v -= p.phase * src.data[ls.index(p.in_opp, j, k)];
        o[p.out_n] += cb[p.out_n] * p.coef * v;
        continue;
      }
      if ((p.axis == 1 ? j : k) != p.out_n) continue;
      std::array<int, 3> in{0, j, k}, opp{0, j, k};
      in[p.axis] = p.in_n;
      opp[p.axis] = p.in_opp;
      const T* s0 = src.data.data() + ls.index(in[0], in[1], in[2]);
      const T* s1 = src.data.data() + ls.index(opp[0], opp[1], opp[2]);
      if (p.periodic) {
        for (int i = 0; i < L; ++i) o[i] += cb[i] * p.coef * (s0[i] - p.phase * s1[i]);
      } else {
        for (int i = 0; i < L; ++i) o[i] += cb[i] * p.coef * s0[i];
      }
    }
  }

  void apply_sources(double t) {
    for (const SourceSpec& s : sources_) {
      const double v = waveform_value(s, t);
      const int a = component_axis(s.target.component);
      Field<T>& e = fields_[s.target.component];
      for (int k = s.target.lo[2]; k <= s.target.hi[2]; ++k)
        for (int j = s.target.lo[1]; j <= s.target.hi[1]; ++j)
          for (int i = s.target.lo[0]; i <= s.target.hi[0]; ++i) {
            const std::size_t idx = e.layout.index(i, j, k);
            e.data[idx] += cb_[a][idx] * v;
          }
    }
  }

  GridSpec grid_;
  SatConfig sat_;
  double dt_;
  SolverOptions opt_;
  FieldSet<T> fields_;
  std::array<SbpOperatorPair, 3> pairs_;
  std::array<std::array<std::vector<detail::Row3>, 2>, 3> rows_;
  std::array<std::vector<double>, 3> ca_, cb_, db_, eps_, mu_;
  std::array<std::vector<Penalty>, 6> penalties_; // by target component
  std::vector<SourceSpec> sources_;
  long step_ = 0;
};

} // namespace sbpfdtd
