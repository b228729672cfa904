#pragma once

// Staggered component layouts, field storage and the matrix-free 3D
// directional derivative. Memory order is x fastest, then y, then z.

#include "sbpfdtd/error.hpp"
#include "sbpfdtd/sbp_operators.hpp"

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace sbpfdtd {

enum class Axis { X = 0, Y = 1, Z = 2 };
enum class Component { Ex = 0, Ey, Ez, Hx, Hy, Hz };

inline constexpr std::array<Component, 6> all_components{Component::Ex, Component::Ey, Component::Ez,
                                                          Component::Hx, Component::Hy, Component::Hz};

constexpr int axis_index(Axis a) noexcept { return static_cast<int>(a); }
constexpr bool is_electric(Component c) noexcept { return static_cast<int>(c) < 3; }
/// Axis the component points along (0, 1, 2).
constexpr int component_axis(Component c) noexcept { return static_cast<int>(c) % 3; }
constexpr Component electric(int axis) noexcept { return static_cast<Component>(axis); }
constexpr Component magnetic(int axis) noexcept { return static_cast<Component>(axis + 3); }

inline std::string_view component_name(Component c) noexcept {
  constexpr std::array<std::string_view, 6> names{"Ex", "Ey", "Ez", "Hx", "Hy", "Hz"};
  return names[static_cast<int>(c)];
}

inline Component parse_component(std::string_view s) {
  for (Component c : all_components)
    if (component_name(c) == s) return c;
  throw ConfigError("unknown field component '" + std::string(s) + "'");
}

struct GridSpec {
  std::array<int, 3> n{4, 4, 4};
  std::array<double, 3> h{1.0, 1.0, 1.0};

  static GridSpec cubic(int cells, double spacing) { return {{cells, cells, cells}, {spacing, spacing, spacing}}; }

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      if (n[a] < 4) throw ConfigError("grid too small for boundary closure");
      if (!(h[a] > 0.0)) throw ConfigError("grid spacing must be positive");
    }
  }
  std::size_t cell_count() const noexcept {
    return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]) * static_cast<std::size_t>(n[2]);
  }
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Node kinds and counts per axis of a 3D staggered array.
struct NodeLayout {
  std::array<NodeKind, 3> kinds{};
  std::array<int, 3> dims{};

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(dims[2]);
  }
  std::size_t index(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
  }
  /// Stride between neighbouring nodes along an axis.
  std::size_t stride(int axis) const noexcept {
    if (axis == 0) return 1;
    if (axis == 1) return static_cast<std::size_t>(dims[0]);
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]);
  }
  bool contains(int i, int j, int k) const noexcept {
    return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
  }
  friend bool operator==(const NodeLayout&, const NodeLayout&) = default;

  static NodeLayout make(const GridSpec& g, std::array<NodeKind, 3> kinds) {
    NodeLayout l;
    l.kinds = kinds;
    for (int a = 0; a < 3; ++a) l.dims[a] = node_count(kinds[a], g.n[a]);
    return l;
  }
};

struct ComponentLayout : NodeLayout {
  Component component = Component::Ex;
};

/// Electric components are Minus along their own axis and Plus elsewhere;
/// magnetic components are the opposite.
constexpr std::array<NodeKind, 3> axis_kinds(Component c) noexcept {
  const int a = component_axis(c);
  const NodeKind own = is_electric(c) ? NodeKind::Minus : NodeKind::Plus;
  std::array<NodeKind, 3> k{flip(own), flip(own), flip(own)};
  k[a] = own;
  return k;
}

inline ComponentLayout layout_for(const GridSpec& g, Component c) {
  ComponentLayout l;
  static_cast<NodeLayout&>(l) = NodeLayout::make(g, axis_kinds(c));
  l.component = c;
  return l;
}

/// Node count of the conventional Yee array of the same component.
inline std::size_t yee_node_count(const GridSpec& g, Component c) {
  const auto kinds = axis_kinds(c);
  std::size_t s = 1;
  for (int a = 0; a < 3; ++a) s *= static_cast<std::size_t>(kinds[a] == NodeKind::Plus ? g.n[a] + 1 : g.n[a]);
  return s;
}

template <class T>
struct Field {
  NodeLayout layout;
  std::vector<T> data;

  Field() = default;
  explicit Field(const NodeLayout& l) : layout(l), data(l.size(), T{}) {}

  T& operator()(int i, int j, int k) noexcept { return data[layout.index(i, j, k)]; }
  const T& operator()(int i, int j, int k) const noexcept { return data[layout.index(i, j, k)]; }
  std::size_t size() const noexcept { return data.size(); }
  void fill(T v) { std::fill(data.begin(), data.end(), v); }
};

enum class ScalarMode { Real, Complex };

template <class T>
struct FieldSet {
  GridSpec grid;
  std::array<Field<T>, 6> f;

  FieldSet() = default;
  explicit FieldSet(const GridSpec& g) : grid(g) {
    g.validate();
    for (Component c : all_components) f[static_cast<int>(c)] = Field<T>(layout_for(g, c));
  }

  static constexpr ScalarMode scalar_mode() noexcept {
    return std::is_same_v<T, std::complex<double>> ? ScalarMode::Complex : ScalarMode::Real;
  }

  Field<T>& operator[](Component c) noexcept { return f[static_cast<int>(c)]; }
  const Field<T>& operator[](Component c) const noexcept { return f[static_cast<int>(c)]; }

  std::size_t total_size() const noexcept {
    std::size_t s = 0;
    for (const auto& x : f) s += x.size();
    return s;
  }
  void zero() {
    for (auto& x : f) x.fill(T{});
  }
};

enum class Face { XLow = 0, XHigh, YLow, YHigh, ZLow, ZHigh };

inline constexpr std::array<Face, 6> all_faces{Face::XLow, Face::XHigh, Face::YLow,
                                                Face::YHigh, Face::ZLow, Face::ZHigh};

constexpr int face_axis(Face f) noexcept { return static_cast<int>(f) / 2; }
constexpr bool face_is_high(Face f) noexcept { return static_cast<int>(f) % 2 == 1; }
constexpr Face make_face(int axis, bool high) noexcept { return static_cast<Face>(2 * axis + (high ? 1 : 0)); }
constexpr Face opposite(Face f) noexcept { return make_face(face_axis(f), !face_is_high(f)); }

inline std::string_view face_name(Face f) noexcept {
  constexpr std::array<std::string_view, 6> names{"x_low", "x_high", "y_low", "y_high", "z_low", "z_high"};
  return names[static_cast<int>(f)];
}

inline Face parse_face(std::string_view s) {
  for (Face f : all_faces)
    if (face_name(f) == s) return f;
  throw ConfigError("unknown face '" + std::string(s) + "'");
}

/// The two axes spanning a face, in ascending order.
constexpr std::array<int, 2> transverse_axes(int normal) noexcept {
  return normal == 0 ? std::array<int, 2>{1, 2} : (normal == 1 ? std::array<int, 2>{0, 2} : std::array<int, 2>{0, 1});
}

/// A boundary slice: the nodes of one component on one face. Only
/// tangential components can be selected, since those are the ones the
/// boundary penalties act on.
struct FaceSelector {
  Face face = Face::XLow;
  Component component = Component::Ey;

  void validate() const {
    if (component_axis(component) == face_axis(face))
      throw LayoutError(std::string(component_name(component)) + " is normal to face " +
                        std::string(face_name(face)) + " and has no tangential boundary slice");
  }
};

template <class T>
struct FaceSlice {
  std::array<int, 2> dims{};
  std::vector<T> data;

  T& operator()(int u, int v) noexcept { return data[static_cast<std::size_t>(u) + static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(v)]; }
  const T& operator()(int u, int v) const noexcept { return data[static_cast<std::size_t>(u) + static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(v)]; }
};

namespace detail {

// Calls fn(flat_index, u, v) for every node of the boundary slice.
template <class Fn>
void for_each_face_node(const NodeLayout& l, Face face, Fn&& fn) {
  const int c = face_axis(face);
  const auto t = transverse_axes(c);
  const int fixed = face_is_high(face) ? l.dims[c] - 1 : 0;
  std::array<int, 3> idx{};
  idx[c] = fixed;
  for (int v = 0; v < l.dims[t[1]]; ++v)
    for (int u = 0; u < l.dims[t[0]]; ++u) {
      idx[t[0]] = u;
      idx[t[1]] = v;
      fn(l.index(idx[0], idx[1], idx[2]), u, v);
    }
}

} // namespace detail

template <class T>
FaceSlice<T> extract_face(const FieldSet<T>& fields, const FaceSelector& sel) {
  sel.validate();
  const auto& fld = fields[sel.component];
  const auto t = transverse_axes(face_axis(sel.face));
  FaceSlice<T> s;
  s.dims = {fld.layout.dims[t[0]], fld.layout.dims[t[1]]};
  s.data.resize(static_cast<std::size_t>(s.dims[0]) * static_cast<std::size_t>(s.dims[1]));
  detail::for_each_face_node(fld.layout, sel.face, [&](std::size_t idx, int u, int v) { s(u, v) = fld.data[idx]; });
  return s;
}

template <class T, class S>
void scatter_face_add(FieldSet<T>& fields, const FaceSelector& sel, const FaceSlice<T>& values, S scale) {
  sel.validate();
  auto& fld = fields[sel.component];
  const auto t = transverse_axes(face_axis(sel.face));
  if (values.dims[0] != fld.layout.dims[t[0]] || values.dims[1] != fld.layout.dims[t[1]])
    throw DimensionError("scatter_face_add: slice dims do not match the face of " +
                         std::string(component_name(sel.component)));
  detail::for_each_face_node(fld.layout, sel.face,
                             [&](std::size_t idx, int u, int v) { fld.data[idx] += scale * values(u, v); });
}

/// Applies the 1D operator along `axis` to every line of `src`. The output
/// lives on the layout with that axis kind flipped.
template <class T>
Field<T> directional_derivative(const Field<T>& src, int axis, const SbpOperatorPair& pair) {
  const NodeLayout& in = src.layout;
  if (pair.n_cells + 1 + (in.kinds[axis] == NodeKind::Minus ? 1 : 0) != in.dims[axis])
    throw DimensionError("directional_derivative: operator size does not match the field along axis " +
                         std::to_string(axis));
  NodeLayout out_l = in;
  out_l.kinds[axis] = flip(in.kinds[axis]);
  out_l.dims[axis] = node_count(out_l.kinds[axis], pair.n_cells);
  Field<T> out(out_l);

  const auto& rows = pair.rows(out_l.kinds[axis]);
  const std::size_t s_in = in.stride(axis);
  const std::size_t s_out = out_l.stride(axis);
  const auto t = transverse_axes(axis);
  std::array<int, 3> idx{};
  for (int v = 0; v < in.dims[t[1]]; ++v)
    for (int u = 0; u < in.dims[t[0]]; ++u) {
      idx[t[0]] = u;
      idx[t[1]] = v;
      idx[axis] = 0;
      const std::size_t base_in = in.index(idx[0], idx[1], idx[2]);
      const std::size_t base_out = out_l.index(idx[0], idx[1], idx[2]);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const StencilRow& row = rows[r];
        T acc{};
        for (int m = 0; m < row.width; ++m) acc += row.w[m] * src.data[base_in + s_in * static_cast<std::size_t>(row.first + m)];
        out.data[base_out + s_out * r] = acc;
      }
    }
  return out;
}

template <class T>
Field<T> directional_derivative(const FieldSet<T>& fields, Component src, int axis, const SbpOperatorPair& pair) {
  return directional_derivative(fields[src], axis, pair);
}

/// Variant that states the expected output grid kind; a mismatch with the
/// source layout is a layout error.
template <class T>
Field<T> directional_derivative(const FieldSet<T>& fields, Component src, int axis, const SbpOperatorPair& pair,
                                NodeKind target) {
  if (fields[src].layout.kinds[axis] != flip(target))
    throw LayoutError(std::string(component_name(src)) + " does not live on the source grid of the requested operator along axis " +
                      std::to_string(axis));
  return directional_derivative(fields[src], axis, pair);
}

} // namespace sbpfdtd
