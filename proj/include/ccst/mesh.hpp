#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ccst/errors.hpp"

namespace ccst {

/**
 * Local node ordering of the 9-node quadrilateral, shared by every kernel and
 * by the VTK writer (it coincides with VTK_BIQUADRATIC_QUAD):
 *
 *     3 --- 6 --- 2        reference coordinates
 *     |           |          0 (-1,-1)  1 ( 1,-1)  2 ( 1, 1)  3 (-1, 1)
 *     7     8     5          4 ( 0,-1)  5 ( 1, 0)  6 ( 0, 1)  7 (-1, 0)
 *     |           |          8 ( 0, 0)
 *     0 --- 4 --- 1
 *
 * Corners 0..3 double as the nodes of the bilinear rotation field.
 */
inline constexpr std::array<std::array<int, 2>, 9> kQ2NodeRef{{
    {-1, -1}, {1, -1}, {1, 1}, {-1, 1}, {0, -1}, {1, 0}, {0, 1}, {-1, 0}, {0, 0}}};

enum class Side { left, right, bottom, top };

inline constexpr std::array<Side, 4> kAllSides{Side::left, Side::right, Side::bottom, Side::top};

inline std::string_view to_string(Side s) {
  switch (s) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
  }
  return "?";
}

inline Side parse_side(std::string_view name) {
  for (Side s : kAllSides)
    if (to_string(s) == name) return s;
  throw InputError("unknown side '" + std::string(name) + "' (expected left/right/bottom/top)");
}

struct Element {
  std::array<std::size_t, 9> nodes;    ///< Q2 node ids in the documented order
  std::array<std::size_t, 4> corners;  ///< corner-node ids, i.e. rotation DOF ids
  Eigen::Vector2d origin;              ///< lower-left corner
  Eigen::Vector2d size;                ///< (dx, dy)

  [[nodiscard]] double area() const { return size.x() * size.y(); }
};

struct BoundaryNodes {
  std::vector<std::size_t> q2;       ///< all nodes on the side
  std::vector<std::size_t> corners;  ///< corner-node ids on the side
};

/**
 * Structured mesh of axis-aligned 9-node quadrilaterals on [0,w] x [0,h].
 *
 * Nodes form a (2nx+1) x (2ny+1) lattice numbered lexicographically (x fastest).
 * Corner nodes (even lattice indices in both directions) get their own
 * (nx+1) x (ny+1) lexicographic numbering, which is the rotation DOF numbering.
 */
class Mesh {
 public:
  Mesh(double width, double height, std::size_t nx, std::size_t ny)
      : width_(width), height_(height), nx_(nx), ny_(ny) {
    if (!(width > 0.0) || !(height > 0.0))
      throw InputError("mesh extents must be positive (width=" + std::to_string(width) +
                       ", height=" + std::to_string(height) + ")");
    if (nx < 1 || ny < 1) throw InputError("mesh element counts must be >= 1");

    const std::size_t cols = 2 * nx + 1;
    const std::size_t rows = 2 * ny + 1;
    nodes_.resize(cols * rows);
    corner_of_node_.assign(cols * rows, npos);
    for (std::size_t j = 0; j < rows; ++j) {
      for (std::size_t i = 0; i < cols; ++i) {
        const std::size_t id = j * cols + i;
        // Coordinates from lattice indices directly so shared nodes are bit-identical.
        nodes_[id] = {width * double(i) / double(cols - 1), height * double(j) / double(rows - 1)};
        if (i % 2 == 0 && j % 2 == 0) {
          corner_of_node_[id] = corner_nodes_.size();
          corner_nodes_.push_back(id);
        }
      }
    }

    elements_.reserve(nx * ny);
    for (std::size_t ey = 0; ey < ny; ++ey) {
      for (std::size_t ex = 0; ex < nx; ++ex) {
        Element e{};
        const std::size_t i0 = 2 * ex, j0 = 2 * ey;
        for (std::size_t a = 0; a < 9; ++a) {
          const std::size_t i = i0 + std::size_t(kQ2NodeRef[a][0] + 1);
          const std::size_t j = j0 + std::size_t(kQ2NodeRef[a][1] + 1);
          e.nodes[a] = j * cols + i;
        }
        for (std::size_t a = 0; a < 4; ++a) e.corners[a] = corner_of_node_[e.nodes[a]];
        e.origin = nodes_[e.nodes[0]];
        e.size = nodes_[e.nodes[2]] - nodes_[e.nodes[0]];
        elements_.push_back(e);
      }
    }
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  [[nodiscard]] double width() const { return width_; }
  [[nodiscard]] double height() const { return height_; }
  [[nodiscard]] std::size_t nx() const { return nx_; }
  [[nodiscard]] std::size_t ny() const { return ny_; }

  [[nodiscard]] std::size_t num_nodes() const { return nodes_.size(); }
  [[nodiscard]] std::size_t num_corners() const { return corner_nodes_.size(); }
  [[nodiscard]] std::size_t num_elements() const { return elements_.size(); }

  [[nodiscard]] const std::vector<Eigen::Vector2d>& nodes() const { return nodes_; }
  [[nodiscard]] const Eigen::Vector2d& node(std::size_t id) const { return nodes_[id]; }
  [[nodiscard]] const std::vector<Element>& elements() const { return elements_; }
  [[nodiscard]] const Element& element(std::size_t e) const { return elements_[e]; }

  /// Node id of every corner, indexed by corner (rotation DOF) id.
  [[nodiscard]] const std::vector<std::size_t>& corner_node_ids() const { return corner_nodes_; }
  /// Corner id of a node, or npos for edge/center nodes.
  [[nodiscard]] std::size_t corner_of_node(std::size_t node) const { return corner_of_node_[node]; }

  [[nodiscard]] Eigen::Vector2d element_center(std::size_t e) const {
    return elements_[e].origin + 0.5 * elements_[e].size;
  }

  /// Element containing point p (closed on the upper sides at the domain boundary).
  [[nodiscard]] std::size_t locate(const Eigen::Vector2d& p) const {
    auto cell = [](double v, double extent, std::size_t n) {
      const double t = std::clamp(v / extent, 0.0, 1.0);
      return std::min(static_cast<std::size_t>(t * double(n)), n - 1);
    };
    return cell(p.y(), height_, ny_) * nx_ + cell(p.x(), width_, nx_);
  }

  [[nodiscard]] std::size_t nearest_node(const Eigen::Vector2d& p) const {
    const std::size_t cols = 2 * nx_ + 1, rows = 2 * ny_ + 1;
    auto idx = [](double v, double extent, std::size_t n) {
      const double t = std::clamp(v / extent, 0.0, 1.0) * double(n - 1);
      return static_cast<std::size_t>(std::lround(t));
    };
    return idx(p.y(), height_, rows) * cols + idx(p.x(), width_, cols);
  }

  [[nodiscard]] double tolerance() const { return 1e-12 * std::max(width_, height_); }

  [[nodiscard]] bool on_side(std::size_t node, Side side) const {
    const auto& x = nodes_[node];
    const double tol = tolerance();
    switch (side) {
      case Side::left: return std::abs(x.x()) <= tol;
      case Side::right: return std::abs(x.x() - width_) <= tol;
      case Side::bottom: return std::abs(x.y()) <= tol;
      case Side::top: return std::abs(x.y() - height_) <= tol;
    }
    return false;
  }

 private:
  double width_, height_;
  std::size_t nx_, ny_;
  std::vector<Eigen::Vector2d> nodes_;
  std::vector<std::size_t> corner_nodes_;
  std::vector<std::size_t> corner_of_node_;
  std::vector<Element> elements_;
};

inline Mesh build_rect_mesh(double width, double height, std::size_t nx, std::size_t ny) {
  return Mesh(width, height, nx, ny);
}

inline BoundaryNodes boundary_nodes(const Mesh& mesh, Side side) {
  BoundaryNodes out;
  for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
    if (!mesh.on_side(n, side)) continue;
    out.q2.push_back(n);
    if (const auto c = mesh.corner_of_node(n); c != Mesh::npos) out.corners.push_back(c);
  }
  return out;
}

/// Element edges lying on a side, as (element id, local edge index 0..3).
/// Local edge k runs from corner k to corner (k+1)%4 with midside node 4+k.
inline std::vector<std::pair<std::size_t, int>> boundary_edges(const Mesh& mesh, Side side) {
  std::vector<std::pair<std::size_t, int>> out;
  const std::size_t nx = mesh.nx(), ny = mesh.ny();
  switch (side) {
    case Side::bottom:
      for (std::size_t i = 0; i < nx; ++i) out.emplace_back(i, 0);
      break;
    case Side::right:
      for (std::size_t j = 0; j < ny; ++j) out.emplace_back(j * nx + nx - 1, 1);
      break;
    case Side::top:
      for (std::size_t i = 0; i < nx; ++i) out.emplace_back((ny - 1) * nx + i, 2);
      break;
    case Side::left:
      for (std::size_t j = 0; j < ny; ++j) out.emplace_back(j * nx, 3);
      break;
  }
  return out;
}

}  // namespace ccst
