#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccst/errors.hpp"
#include "ccst/fields.hpp"
#include "ccst/mesh.hpp"

namespace ccst {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  return out;
}

/// Plain CSV with a header row. Numbers are written with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
      : path_(path), out_(open_output(path)), width_(columns.size()) {
    row(columns);
  }

  template <class... Ts>
  void write(const Ts&... values) {
    if (sizeof...(Ts) != width_) throw IoError("row width does not match the header of " + path_.string());
    bool first = true;
    ((out_ << (first ? "" : ",") << values, first = false), ...);
    out_ << '\n';
    if (!out_) throw IoError("write failed on " + path_.string());
  }

 private:
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
};

// ----------------------------------------------------------------------------
// VTK legacy ASCII
// ----------------------------------------------------------------------------

inline constexpr int kVtkBiquadraticQuad = 28;

/**
 * UNSTRUCTURED_GRID with one biquadratic quad (cell type 28) per element.
 * u_full: 2 per node, theta_full: one per corner, s: one per element.
 * Rotation values at edge and center nodes are bilinear interpolants of the
 * corner values, which the header line states.
 */
inline void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const Eigen::VectorXd& u_full,
                      const Eigen::VectorXd& theta_full, const Eigen::VectorXd& s, double time = 0.0) {
  const auto nn = mesh.num_nodes(), ne = mesh.num_elements();
  if (std::size_t(u_full.size()) != 2 * nn) throw InputError("u field length does not match 2 x node count");
  if (std::size_t(theta_full.size()) != mesh.num_corners())
    throw InputError("theta field length does not match the corner count");
  if (std::size_t(s.size()) != ne) throw InputError("s field length does not match the element count");

  auto out = open_output(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "ccst t=" << time << " (theta at edge/center nodes is interpolated from corners)\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nn << " double\n";
  for (std::size_t n = 0; n < nn; ++n) out << mesh.node(n).x() << ' ' << mesh.node(n).y() << " 0\n";
  out << "CELLS " << ne << ' ' << ne * 10 << '\n';
  for (std::size_t e = 0; e < ne; ++e) {
    out << 9;
    for (auto id : mesh.element(e).nodes) out << ' ' << id;
    out << '\n';
  }
  out << "CELL_TYPES " << ne << '\n';
  for (std::size_t e = 0; e < ne; ++e) out << kVtkBiquadraticQuad << '\n';

  out << "POINT_DATA " << nn << '\n';
  out << "VECTORS u double\n";
  for (std::size_t n = 0; n < nn; ++n) out << u_full(Eigen::Index(2 * n)) << ' ' << u_full(Eigen::Index(2 * n + 1)) << " 0\n";
  out << "SCALARS theta double 1\nLOOKUP_TABLE default\n";
  const Eigen::VectorXd th = rotation_at_nodes(mesh, theta_full);
  for (Eigen::Index n = 0; n < th.size(); ++n) out << th(n) << '\n';
  out << "CELL_DATA " << ne << '\n';
  out << "SCALARS s double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index e = 0; e < s.size(); ++e) out << s(e) << '\n';
  if (!out) throw IoError("write failed on " + path.string());
}

struct VtkGrid {
  std::vector<Eigen::Vector3d> points;
  std::vector<std::vector<std::size_t>> cells;
  std::vector<int> cell_types;
};

/// Reads back the geometry section of a legacy ASCII unstructured grid.
inline VtkGrid read_vtk_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  VtkGrid g;
  std::string word;
  while (in >> word) {
    if (word == "POINTS") {
      std::size_t n = 0;
      std::string type;
      in >> n >> type;
      g.points.resize(n);
      for (auto& p : g.points) in >> p.x() >> p.y() >> p.z();
    } else if (word == "CELLS") {
      std::size_t n = 0, total = 0;
      in >> n >> total;
      g.cells.resize(n);
      for (auto& c : g.cells) {
        std::size_t k = 0;
        in >> k;
        c.resize(k);
        for (auto& id : c) in >> id;
      }
    } else if (word == "CELL_TYPES") {
      std::size_t n = 0;
      in >> n;
      g.cell_types.resize(n);
      for (auto& t : g.cell_types) in >> t;
    }
  }
  if (in.bad()) throw IoError("read failed on " + path.string());
  return g;
}

// ----------------------------------------------------------------------------
// SVG line plots
// ----------------------------------------------------------------------------

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
  bool markers = false;
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
};

/// Minimal line chart; a convenience view of data that is also written as CSV.
inline void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec,
                           const std::vector<PlotSeries>& series) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 50;
  auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.logy ? std::log10(v) : v; };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((spec.logx && !(s.x[i] > 0)) || (spec.logy && !(s.y[i] > 0))) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  auto out = open_output(path);
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << spec.title << "</text>\n";
  out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](double v, bool log) {
    std::ostringstream s;
    s << std::setprecision(3) << (log ? std::pow(10.0, v) : v);
    return s.str();
  };
  for (int k = 0; k <= 4; ++k) {
    const double vx = x0 + (x1 - x0) * k / 4.0, vy = y0 + (y1 - y0) * k / 4.0;
    const double sx = L + (W - L - R) * k / 4.0, sy = H - B - (H - T - B) * k / 4.0;
    out << "<text x=\"" << sx << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << label(vx, spec.logx)
        << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">" << label(vy, spec.logy)
        << "</text>\n";
  }
  out << "<text x=\"" << (W - R + L) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << spec.xlabel
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
      << ")\" text-anchor=\"middle\">" << spec.ylabel << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colors[k % 7];
    out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((spec.logx && !(s.x[i] > 0)) || (spec.logy && !(s.y[i] > 0))) continue;
      out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    out << "\"/>\n";
    if (s.markers)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
    out << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (k + 1) << "\" fill=\"" << c << "\">" << s.name
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace ccst
