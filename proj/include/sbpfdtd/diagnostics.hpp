#pragma once

// Discrete energy, probe spectra, plane power flux, S-parameters and point
// SAR.

#include "sbpfdtd/error.hpp"
#include "sbpfdtd/grid.hpp"
#include "sbpfdtd/materials.hpp"
#include "sbpfdtd/sbp_operators.hpp"
#include "sbpfdtd/solver.hpp"
#include "sbpfdtd/sources.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

namespace sbpfdtd {

// ---------------------------------------------------------------- energy

struct EnergyReport {
  double total = 0.0;
  std::array<double, 6> terms{}; // Ex, Ey, Ez, Hx, Hy, Hz
};

/// Tensor-product norm weight of every node of a layout.
inline std::vector<double> norm_weights(const NodeLayout& l, const std::array<SbpOperatorPair, 3>& pairs) {
  std::vector<double> w(l.size());
  const auto& px = pairs[0].weights(l.kinds[0]);
  const auto& py = pairs[1].weights(l.kinds[1]);
  const auto& pz = pairs[2].weights(l.kinds[2]);
  std::size_t idx = 0;
  for (int k = 0; k < l.dims[2]; ++k)
    for (int j = 0; j < l.dims[1]; ++j)
      for (int i = 0; i < l.dims[0]; ++i) w[idx++] = px[i] * py[j] * pz[k];
  return w;
}

inline std::array<SbpOperatorPair, 3> build_pairs(const GridSpec& g) {
  return {build_sbp_pair(g.n[0], g.h[0]), build_sbp_pair(g.n[1], g.h[1]), build_sbp_pair(g.n[2], g.h[2])};
}

/// Caches material-weighted norms: eps * P for E components, mu * P for H.
class EnergyMonitor {
public:
  EnergyMonitor(const GridSpec& g, const MaterialGrid& m) {
    const auto pairs = build_pairs(g);
    for (Component c : all_components) {
      const ComponentLayout l = layout_for(g, c);
      auto& w = weights_[static_cast<int>(c)];
      w = norm_weights(l, pairs);
      std::size_t idx = 0;
      for (int k = 0; k < l.dims[2]; ++k)
        for (int j = 0; j < l.dims[1]; ++j)
          for (int i = 0; i < l.dims[0]; ++i, ++idx) {
            const NodeMaterial nm = sample_material(m, c, i, j, k);
            w[idx] *= is_electric(c) ? nm.eps : nm.mu;
          }
    }
  }

  template <class T>
  explicit EnergyMonitor(const Solver<T>& s) {
    std::array<SbpOperatorPair, 3> pairs{s.pair(0), s.pair(1), s.pair(2)};
    for (Component c : all_components) {
      auto& w = weights_[static_cast<int>(c)];
      w = norm_weights(s.fields()[c].layout, pairs);
      const auto& mat = is_electric(c) ? s.node_eps(component_axis(c)) : s.node_mu(component_axis(c));
      for (std::size_t i = 0; i < w.size(); ++i) w[i] *= mat[i];
    }
  }

  const std::vector<double>& weights(Component c) const noexcept { return weights_[static_cast<int>(c)]; }

  /// Collocated energy: 1/2 sum w |u|^2 over all six components.
  template <class T>
  EnergyReport operator()(const FieldSet<T>& f) const {
    EnergyReport r;
    for (Component c : all_components) r.terms[static_cast<int>(c)] = 0.5 * quad(c, f[c].data, f[c].data);
    r.total = std::accumulate(r.terms.begin(), r.terms.end(), 0.0);
    return r;
  }

  /// Leapfrog energy: E terms from `f` (step n), H terms as the real part of
  /// the product of H^{n-1/2} (`h_prev`) and H^{n+1/2} (taken from `f`).
  template <class T>
  EnergyReport operator()(const FieldSet<T>& f, const FieldSet<T>& h_prev) const {
    EnergyReport r;
    for (Component c : all_components) {
      const auto& other = is_electric(c) ? f[c].data : h_prev[c].data;
      r.terms[static_cast<int>(c)] = 0.5 * quad(c, other, f[c].data);
    }
    r.total = std::accumulate(r.terms.begin(), r.terms.end(), 0.0);
    return r;
  }

private:
  template <class T>
  double quad(Component c, const std::vector<T>& u, const std::vector<T>& v) const {
    const auto& w = weights_[static_cast<int>(c)];
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if constexpr (std::is_same_v<T, std::complex<double>>)
        s += w[i] * (std::conj(u[i]) * v[i]).real();
      else
        s += w[i] * u[i] * v[i];
    }
    return s;
  }

  std::array<std::vector<double>, 6> weights_;
};

template <class T>
EnergyReport discrete_energy(const FieldSet<T>& f, const MaterialGrid& m) {
  return EnergyMonitor(f.grid, m)(f);
}

// -------------------------------------------------------------- spectrum

enum class Window { None, Hann };

struct Peak {
  double frequency = 0.0;
  double magnitude = 0.0;
  std::size_t bin = 0;
};

struct SpectrumResult {
  std::vector<double> freq;                 // one-sided bins, Hz
  std::vector<std::complex<double>> amp;    // raw DFT values of the (windowed) record
  std::vector<Peak> peaks;                  // sorted by frequency
  std::size_t n_samples = 0;
  double df = 0.0;
};

namespace detail {

// One-sided DFT of a real sequence via FFTW.
inline std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> in(x);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan p = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  if (!p) throw NumericalError("FFTW plan creation failed");
  fftw_execute(p);
  fftw_destroy_plan(p);
  return out;
}

} // namespace detail

/// Local maxima of the magnitude at or above `rel_threshold` times the
/// global maximum, refined by a parabola through the log magnitudes of the three
/// bins around each.
inline std::vector<Peak> find_peaks(const std::vector<std::complex<double>>& amp, double df, double rel_threshold = 0.05) {
  std::vector<Peak> peaks;
  const std::size_t n = amp.size();
  if (n == 0) return peaks;
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = std::abs(amp[i]);
  const double gmax = *std::max_element(m.begin(), m.end());
  if (gmax <= 0.0) return peaks;
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? m[i - 1] : -1.0;
    const double right = i + 1 < n ? m[i + 1] : -1.0;
    if (m[i] < rel_threshold * gmax || m[i] <= left || m[i] < right) continue;
    Peak p{i * df, m[i], i};
    // Neighbours at roundoff level mean the tone sits on the bin.
    const double floor = 1e-10 * m[i];
    if (i > 0 && i + 1 < n && m[i - 1] > floor && m[i + 1] > floor) {
      // Parabola through log magnitudes: near-unbiased for smooth windows.
      const double a = std::log(m[i - 1]), b = std::log(m[i]), c = std::log(m[i + 1]);
      const double den = a - 2.0 * b + c;
      if (den < 0.0) {
        const double d = 0.5 * (a - c) / den;
        p.frequency = (static_cast<double>(i) + d) * df;
        p.magnitude = std::exp(b - 0.25 * (a - c) * d);
      }
    }
    peaks.push_back(p);
  }
  return peaks;
}

inline SpectrumResult spectrum(const std::vector<double>& record, double dt, int stride = 1, Window window = Window::None,
                               bool remove_mean = false, double rel_threshold = 0.05) {
  if (record.size() < 2) throw DimensionError("spectrum needs at least two samples");
  const std::size_t n = record.size();
  std::vector<double> x(record);
  if (remove_mean) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    for (double& v : x) v -= mean;
  }
  if (window == Window::Hann)
    for (std::size_t i = 0; i < n; ++i) x[i] *= 0.5 - 0.5 * std::cos(2.0 * constants::pi * static_cast<double>(i) / static_cast<double>(n));
  SpectrumResult r;
  r.n_samples = n;
  r.df = 1.0 / (static_cast<double>(n) * dt * stride);
  r.amp = detail::rfft(x);
  r.freq.resize(r.amp.size());
  for (std::size_t i = 0; i < r.freq.size(); ++i) r.freq[i] = static_cast<double>(i) * r.df;
  r.peaks = find_peaks(r.amp, r.df, rel_threshold);
  return r;
}

/// Sum of squares of the record reconstructed from the one-sided bins
/// (Parseval): (|X_0|^2 + 2 sum |X_k|^2 + |X_{N/2}|^2) / N.
inline double spectral_power(const SpectrumResult& s) {
  const std::size_t n = s.n_samples;
  double p = 0.0;
  for (std::size_t k = 0; k < s.amp.size(); ++k) {
    const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
    p += (edge ? 1.0 : 2.0) * std::norm(s.amp[k]);
  }
  return p / static_cast<double>(n);
}

/// Highest peak inside [f_lo, f_hi]; throws if there is none.
inline Peak dominant_peak(const SpectrumResult& s, double f_lo, double f_hi) {
  const Peak* best = nullptr;
  for (const Peak& p : s.peaks)
    if (p.frequency >= f_lo && p.frequency <= f_hi && (!best || p.magnitude > best->magnitude)) best = &p;
  if (!best) throw NumericalError("no spectral peak in the requested band");
  return *best;
}

// ----------------------------------------------------------- plane power

/// Time series of the tangential fields on an observation plane, averaged
/// to cell-face centres. For plane normal c the cyclic axes are a = c+1 and
/// b = c+2; ea[t][cell] etc. hold E_a, E_b, H_a, H_b at sample t.
struct PlaneRecord {
  int axis = 2;
  std::vector<double> area;                 // per cell
  std::vector<std::vector<double>> ea, eb, ha, hb;
  int stride = 1;

  std::size_t cells() const noexcept { return area.size(); }
  std::size_t samples() const noexcept { return ea.size(); }
};

/// Samples a plane probe. capture() must be called after every H update
/// (E at step n, H at n+1/2): H is averaged with the previous half step so
/// that E and H refer to the same integer time level.
class PlaneRecorder {
public:
  PlaneRecorder(const GridSpec& g, const ProbeSpec& p) : g_(g), spec_(p) {
    p.validate(g);
    rec_.axis = p.axis;
    rec_.stride = p.stride;
    c_ = p.axis;
    a_ = (c_ + 1) % 3;
    b_ = (c_ + 2) % 3;
    const auto t = transverse_axes(c_);
    const auto e = p.resolved_extent(g);
    // Ranges along a and b from the ascending-order extent.
    std::array<int, 2> ra{}, rb{};
    if (t[0] == a_) {
      ra = {e[0], e[1]};
      rb = {e[2], e[3]};
    } else {
      ra = {e[2], e[3]};
      rb = {e[0], e[1]};
    }
    for (int ib = rb[0]; ib < rb[1]; ++ib)
      for (int ia = ra[0]; ia < ra[1]; ++ia) cells_.push_back({ia, ib});
    rec_.area.assign(cells_.size(), g.h[a_] * g.h[b_]);
    prev_ha_.assign(cells_.size(), 0.0);
    prev_hb_.assign(cells_.size(), 0.0);
  }

  void capture(const FieldSet<double>& f, long step) {
    std::vector<double> ha(cells_.size()), hb(cells_.size());
    for (std::size_t q = 0; q < cells_.size(); ++q) {
      ha[q] = avg_h(f, a_, q);
      hb[q] = avg_h(f, b_, q);
    }
    if (step % spec_.stride == 0) {
      std::vector<double> ea(cells_.size()), eb(cells_.size()), han(cells_.size()), hbn(cells_.size());
      for (std::size_t q = 0; q < cells_.size(); ++q) {
        ea[q] = avg_e(f, a_, q);
        eb[q] = avg_e(f, b_, q);
        han[q] = 0.5 * (ha[q] + prev_ha_[q]);
        hbn[q] = 0.5 * (hb[q] + prev_hb_[q]);
      }
      rec_.ea.push_back(std::move(ea));
      rec_.eb.push_back(std::move(eb));
      rec_.ha.push_back(std::move(han));
      rec_.hb.push_back(std::move(hbn));
    }
    prev_ha_ = std::move(ha);
    prev_hb_ = std::move(hb);
  }

  const PlaneRecord& record() const noexcept { return rec_; }

private:
  // Lowest node index around face cell q; Minus axes shift by one below.
  std::array<int, 3> base(std::size_t q) const {
    std::array<int, 3> idx{};
    idx[a_] = cells_[q][0];
    idx[b_] = cells_[q][1];
    idx[c_] = spec_.position;
    return idx;
  }

  // Average of a component over the nodes surrounding the face centre.
  // Minus nodes sit at cell centres (cell + 1), Plus nodes straddle them.
  double average(const Field<double>& fld, std::size_t q, bool avg_c) const {
    const auto kinds = fld.layout.kinds;
    std::array<int, 3> lo = base(q);
    std::array<int, 3> count{1, 1, 1};
    for (int ax : {a_, b_}) {
      if (kinds[ax] == NodeKind::Minus) {
        lo[ax] += 1;
      } else {
        count[ax] = 2;
      }
    }
    if (avg_c) count[c_] = 2;
    double s = 0.0;
    int n = 0;
    for (int dk = 0; dk < count[2]; ++dk)
      for (int dj = 0; dj < count[1]; ++dj)
        for (int di = 0; di < count[0]; ++di, ++n) s += fld(lo[0] + di, lo[1] + dj, lo[2] + dk);
    return s / n;
  }

  double avg_e(const FieldSet<double>& f, int axis, std::size_t q) const { return average(f[electric(axis)], q, false); }
  double avg_h(const FieldSet<double>& f, int axis, std::size_t q) const { return average(f[magnetic(axis)], q, true); }

  GridSpec g_;
  ProbeSpec spec_;
  int a_ = 0, b_ = 1, c_ = 2;
  std::vector<std::array<int, 2>> cells_;
  PlaneRecord rec_;
  std::vector<double> prev_ha_, prev_hb_;
};

struct PowerSpectrum {
  std::vector<double> freq;
  std::vector<std::complex<double>> power;
};

namespace detail {

// Phasor-normalised one-sided DFT: a real cosine of amplitude A at a bin
// centre maps to |X| = A.
inline std::vector<std::complex<double>> phasor_dft(const std::vector<double>& x) {
  auto X = rfft(x);
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < X.size(); ++k) {
    const bool edge = k == 0 || (x.size() % 2 == 0 && k == x.size() / 2);
    X[k] *= (edge ? 1.0 : 2.0) / n;
  }
  return X;
}

} // namespace detail

/// P(f) = sum_cells [F(E_a) F(H_b)^* - F(E_b) F(H_a)^*] * area, the flux
/// through the plane along its normal.
inline PowerSpectrum plane_power(const PlaneRecord& r, double dt) {
  const std::size_t nt = r.samples(), nc = r.cells();
  if (nt < 2) throw DimensionError("plane_power needs at least two samples");
  if (r.eb.size() != nt || r.ha.size() != nt || r.hb.size() != nt)
    throw DimensionError("plane_power: E and H records have different lengths");
  for (std::size_t t = 0; t < nt; ++t)
    if (r.ea[t].size() != nc || r.eb[t].size() != nc || r.ha[t].size() != nc || r.hb[t].size() != nc)
      throw DimensionError("plane_power: sample " + std::to_string(t) + " has the wrong cell count");
  PowerSpectrum out;
  const std::size_t nf = nt / 2 + 1;
  out.power.assign(nf, {0.0, 0.0});
  out.freq.resize(nf);
  const double df = 1.0 / (static_cast<double>(nt) * dt * r.stride);
  for (std::size_t k = 0; k < nf; ++k) out.freq[k] = static_cast<double>(k) * df;
  std::vector<double> s(nt);
  auto series = [&](const std::vector<std::vector<double>>& v, std::size_t c) {
    for (std::size_t t = 0; t < nt; ++t) s[t] = v[t][c];
    return detail::phasor_dft(s);
  };
  for (std::size_t c = 0; c < nc; ++c) {
    const auto Ea = series(r.ea, c), Eb = series(r.eb, c), Ha = series(r.ha, c), Hb = series(r.hb, c);
    for (std::size_t k = 0; k < nf; ++k) out.power[k] += (Ea[k] * std::conj(Hb[k]) - Eb[k] * std::conj(Ha[k])) * r.area[c];
  }
  return out;
}

// ------------------------------------------------------- S-parameters

struct SParameters {
  std::vector<double> freq;
  std::vector<double> s11, s21; // NaN where masked
  std::vector<bool> valid;
};

/// S11 = |P_r / P_i|, S21 = |P_t / P_i|. Bins where |P_i| falls below
/// `rel_floor` times its maximum are masked.
inline SParameters s_parameters(const std::vector<double>& freq, const std::vector<std::complex<double>>& p_inc,
                                const std::vector<std::complex<double>>& p_ref,
                                const std::vector<std::complex<double>>& p_tra, double rel_floor = 1e-6) {
  const std::size_t n = freq.size();
  if (p_inc.size() != n || p_ref.size() != n || p_tra.size() != n)
    throw DimensionError("s_parameters: power spectra must share the frequency grid");
  double pmax = 0.0;
  for (const auto& p : p_inc) pmax = std::max(pmax, std::abs(p));
  SParameters s;
  s.freq = freq;
  s.s11.resize(n);
  s.s21.resize(n);
  s.valid.resize(n);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < n; ++k) {
    const double pi = std::abs(p_inc[k]);
    s.valid[k] = pmax > 0.0 && pi > rel_floor * pmax;
    s.s11[k] = s.valid[k] ? std::abs(p_ref[k] / p_inc[k]) : nan;
    s.s21[k] = s.valid[k] ? std::abs(p_tra[k] / p_inc[k]) : nan;
  }
  return s;
}

// ------------------------------------------------------------------ SAR

/// Running maximum of |E|^2 at cell centres.
class SarTracker {
public:
  explicit SarTracker(const GridSpec& g) : g_(g), max_e2_(g.cell_count(), 0.0) {}

  template <class T>
  void update(const FieldSet<T>& f) {
    for (int k = 0; k < g_.n[2]; ++k)
      for (int j = 0; j < g_.n[1]; ++j)
        for (int i = 0; i < g_.n[0]; ++i) {
          double e2 = 0.0;
          for (int a = 0; a < 3; ++a) e2 += std::norm(cell_average(f[electric(a)], a, i, j, k));
          double& m = max_e2_[static_cast<std::size_t>(i) + static_cast<std::size_t>(g_.n[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(g_.n[1]) * static_cast<std::size_t>(k))];
          m = std::max(m, e2);
        }
  }

  const std::vector<double>& max_e2() const noexcept { return max_e2_; }

  /// E_a averaged to the centre of cell (i, j, k): exact along a (Minus
  /// node i + 1), mean of the four surrounding edges otherwise.
  template <class T>
  static T cell_average(const Field<T>& e, int a, int i, int j, int k) {
    std::array<int, 3> lo{i, j, k};
    std::array<int, 3> cnt{2, 2, 2};
    lo[a] += 1;
    cnt[a] = 1;
    T s{};
    for (int dk = 0; dk < cnt[2]; ++dk)
      for (int dj = 0; dj < cnt[1]; ++dj)
        for (int di = 0; di < cnt[0]; ++di) s += e(lo[0] + di, lo[1] + dj, lo[2] + dk);
    return s * 0.25;
  }

private:
  GridSpec g_;
  std::vector<double> max_e2_;
};

/// SAR = sigma * max|E|^2 / (2 rho) per cell; zero where sigma is zero.
inline std::vector<double> point_sar(const std::vector<double>& max_e2, const MaterialGrid& m) {
  if (max_e2.size() != m.size()) throw DimensionError("point_sar: field maxima do not match the material grid");
  std::vector<double> sar(m.size(), 0.0);
  for (std::size_t c = 0; c < m.size(); ++c) {
    if (m.sigma_e[c] == 0.0) continue;
    if (!(m.rho[c] > 0.0)) throw ConfigError("point_sar: cell " + std::to_string(c) + " is conductive but has zero density");
    sar[c] = m.sigma_e[c] * max_e2[c] / (2.0 * m.rho[c]);
  }
  return sar;
}

} // namespace sbpfdtd
