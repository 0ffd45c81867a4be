#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "ccst/element.hpp"
#include "ccst/mesh.hpp"

namespace ccst {

/// Reference coordinates of a physical point inside an axis-aligned element.
inline Eigen::Vector2d reference_coords(const Element& el, const Eigen::Vector2d& p) {
  const Eigen::Vector2d r = 2.0 * (p - el.origin).cwiseQuotient(el.size) - Eigen::Vector2d::Ones();
  return r.cwiseMax(-1.0).cwiseMin(1.0);
}

/// Displacement at a point from a full interleaved nodal vector.
inline Eigen::Vector2d displacement_at(const Mesh& mesh, const Eigen::VectorXd& u_full, const Eigen::Vector2d& p) {
  const Element& el = mesh.element(mesh.locate(p));
  const Eigen::Vector2d r = reference_coords(el, p);
  const auto q2 = shape<Order::Q2>(r.x(), r.y());
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (int a = 0; a < 9; ++a) out += q2.N(a) * u_full.segment<2>(Eigen::Index(2 * el.nodes[a]));
  return out;
}

/// Bilinear rotation at a point from a full corner vector.
inline double rotation_at(const Mesh& mesh, const Eigen::VectorXd& theta_full, const Eigen::Vector2d& p) {
  const Element& el = mesh.element(mesh.locate(p));
  const Eigen::Vector2d r = reference_coords(el, p);
  const auto q1 = shape<Order::Q1>(r.x(), r.y());
  double out = 0.0;
  for (int a = 0; a < 4; ++a) out += q1.N(a) * theta_full(Eigen::Index(el.corners[a]));
  return out;
}

/// Rotation at every Q2 node: corner values copied, other nodes interpolated bilinearly.
inline Eigen::VectorXd rotation_at_nodes(const Mesh& mesh, const Eigen::VectorXd& theta_full) {
  Eigen::VectorXd out(Eigen::Index(mesh.num_nodes()));
  for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
    const auto c = mesh.corner_of_node(n);
    out(Eigen::Index(n)) = c != Mesh::npos ? theta_full(Eigen::Index(c)) : rotation_at(mesh, theta_full, mesh.node(n));
  }
  return out;
}

}  // namespace ccst
