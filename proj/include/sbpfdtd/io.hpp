#pragma once

// Output writers. Numbers are written in shortest round-trip form so that
// files reproduce bit-identical doubles. Formats are documented in
// docs/file_formats.md.

#include "sbpfdtd/diagnostics.hpp"
#include "sbpfdtd/error.hpp"
#include "sbpfdtd/grid.hpp"

#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sbpfdtd {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

/// Writes rows to a CSV file with a header line; throws Error on I/O failure.
class CsvWriter {
public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : path_(path), out_(path) {
    if (!out_) throw Error("cannot open '" + path + "' for writing");
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  void close() {
    out_.close();
    if (!out_) throw Error("write to '" + path_ + "' failed");
  }

private:
  std::string path_;
  std::ofstream out_;
};

struct EnergySample {
  long step = 0;
  double time = 0.0;
  EnergyReport report;
};

inline void write_energy_csv(const std::string& path, const std::vector<EnergySample>& s) {
  CsvWriter w(path, {"step", "time", "total", "Ex", "Ey", "Ez", "Hx", "Hy", "Hz"});
  for (const auto& e : s) {
    std::vector<std::string> r{std::to_string(e.step), fmt(e.time), fmt(e.report.total)};
    for (double t : e.report.terms) r.push_back(fmt(t));
    w.row(r);
  }
  w.close();
}

struct ProbeTrace {
  std::string name;
  Component component = Component::Ez;
  std::vector<long> steps;
  std::vector<double> times;
  std::vector<double> values;
};

inline void write_probe_csv(const std::string& path, const ProbeTrace& p) {
  CsvWriter w(path, {"step", "time", "value"});
  for (std::size_t i = 0; i < p.values.size(); ++i) w.row({std::to_string(p.steps[i]), fmt(p.times[i]), fmt(p.values[i])});
  w.close();
}

inline void write_spectrum_csv(const std::string& path, const std::vector<double>& freq,
                               const std::vector<std::complex<double>>& amp) {
  CsvWriter w(path, {"frequency_hz", "re", "im", "magnitude"});
  for (std::size_t i = 0; i < freq.size(); ++i)
    w.row({fmt(freq[i]), fmt(amp[i].real()), fmt(amp[i].imag()), fmt(std::abs(amp[i]))});
  w.close();
}

inline void write_peaks_csv(const std::string& path, const std::vector<Peak>& peaks) {
  CsvWriter w(path, {"frequency_hz", "magnitude", "bin"});
  for (const auto& p : peaks) w.row({fmt(p.frequency), fmt(p.magnitude), std::to_string(p.bin)});
  w.close();
}

/// Power-ratio magnitudes plus 10 log10 S in dB; masked bins are written as nan.
inline void write_sparams_csv(const std::string& path, const SParameters& s) {
  CsvWriter w(path, {"frequency_hz", "s11", "s21", "s11_db", "s21_db"});
  auto db = [](double v) { return std::isnan(v) ? v : 10.0 * std::log10(v); };
  for (std::size_t i = 0; i < s.freq.size(); ++i)
    w.row({fmt(s.freq[i]), fmt(s.s11[i]), fmt(s.s21[i]), fmt(db(s.s11[i])), fmt(db(s.s21[i]))});
  w.close();
}

inline void write_cell_csv(const std::string& path, const GridSpec& g, const std::vector<double>& v, const std::string& column) {
  CsvWriter w(path, {"i", "j", "k", column});
  std::size_t c = 0;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i, ++c) w.row({std::to_string(i), std::to_string(j), std::to_string(k), fmt(v[c])});
  w.close();
}

/// Reads a numeric CSV with a header line. Columns are looked up by name.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ConfigError("CSV has no column '" + name + "'");
  }
  std::vector<double> values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.at(c));
    return out;
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (t.header.empty()) {
      t.header = cells;
      continue;
    }
    if (cells.size() != t.header.size())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) + " columns");
    std::vector<double> r;
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        r.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": '" + c + "' is not a number");
      }
    }
    t.rows.push_back(std::move(r));
  }
  if (t.header.empty()) throw ConfigError(path + ": empty CSV");
  return t;
}

/// Legacy VTK structured points of one component. SBP nodes are written on
/// a uniform lattice: Plus axes start at 0, Minus axes at -h/2, spacing h.
/// The two outermost Minus nodes therefore appear h/2 away from their true
/// position on the boundary.
template <class T>
void write_vtk(const std::string& path, const Field<T>& f, Component c, const GridSpec& g, long step) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const auto kinds = axis_kinds(c);
  out << "# vtk DataFile Version 3.0\n";
  out << "sbpfdtd " << component_name(c) << " step " << step << "\n";
  out << "ASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << f.layout.dims[0] << ' ' << f.layout.dims[1] << ' ' << f.layout.dims[2] << "\n";
  out << "ORIGIN";
  for (int a = 0; a < 3; ++a) out << ' ' << fmt(kinds[a] == NodeKind::Minus ? -0.5 * g.h[a] : 0.0);
  out << "\nSPACING " << fmt(g.h[0]) << ' ' << fmt(g.h[1]) << ' ' << fmt(g.h[2]) << "\n";
  out << "POINT_DATA " << f.size() << "\n";
  out << "SCALARS " << component_name(c) << " double 1\nLOOKUP_TABLE default\n";
  for (const T& v : f.data) {
    if constexpr (std::is_same_v<T, double>)
      out << fmt(v) << '\n';
    else
      out << fmt(v.real()) << '\n';
  }
  out.close();
  if (!out) throw Error("write to '" + path + "' failed");
}

template <class T>
void write_field_csv(const std::string& path, const Field<T>& f) {
  CsvWriter w(path, {"i", "j", "k", "value"});
  for (int k = 0; k < f.layout.dims[2]; ++k)
    for (int j = 0; j < f.layout.dims[1]; ++j)
      for (int i = 0; i < f.layout.dims[0]; ++i) {
        const T& v = f(i, j, k);
        double x;
        if constexpr (std::is_same_v<T, double>)
          x = v;
        else
          x = v.real();
        w.row({std::to_string(i), std::to_string(j), std::to_string(k), fmt(x)});
      }
  w.close();
}

} // namespace sbpfdtd
