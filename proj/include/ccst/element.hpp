#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "ccst/errors.hpp"
#include "ccst/material.hpp"
#include "ccst/mesh.hpp"

namespace ccst {

// ----------------------------------------------------------------------------
// Quadrature
// ----------------------------------------------------------------------------

template <int N>
struct GaussRule {
  std::array<double, N> x{};
  std::array<double, N> w{};
};

/// N-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_N).
template <int N>
GaussRule<N> gauss_legendre() {
  static_assert(N >= 1 && N <= 16);
  GaussRule<N> rule;
  for (int i = 0; i < N; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= N; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = N * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.x[N - 1 - i] = x;
    rule.w[N - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

// ----------------------------------------------------------------------------
// Shape functions
// ----------------------------------------------------------------------------

enum class Order { Q0, Q1, Q2 };

template <Order O>
inline constexpr int kNumShape = O == Order::Q2 ? 9 : O == Order::Q1 ? 4 : 1;

/// Shape function values and reference gradients (columns d/dxi, d/deta).
template <Order O>
struct ShapeEval {
  static constexpr int n = kNumShape<O>;
  Eigen::Matrix<double, n, 1> N;
  Eigen::Matrix<double, n, 2> dN;
};

namespace detail {

// 1D quadratic Lagrange basis on nodes -1, 0, 1 (indexed by node coordinate + 1).
inline std::array<double, 3> lagrange2(double t) {
  return {0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)};
}
inline std::array<double, 3> lagrange2_d(double t) { return {t - 0.5, -2.0 * t, t + 0.5}; }

}  // namespace detail

template <Order O>
ShapeEval<O> shape(double xi, double eta) {
  constexpr double tol = 1e-12;
  if (!(std::abs(xi) <= 1.0 + tol && std::abs(eta) <= 1.0 + tol))
    throw InputError("reference point (" + std::to_string(xi) + ", " + std::to_string(eta) +
                     ") lies outside [-1,1]^2");
  ShapeEval<O> s;
  if constexpr (O == Order::Q0) {
    s.N(0) = 1.0;
    s.dN.setZero();
  } else if constexpr (O == Order::Q1) {
    for (int a = 0; a < 4; ++a) {
      const double xa = kQ2NodeRef[a][0], ya = kQ2NodeRef[a][1];
      s.N(a) = 0.25 * (1.0 + xa * xi) * (1.0 + ya * eta);
      s.dN(a, 0) = 0.25 * xa * (1.0 + ya * eta);
      s.dN(a, 1) = 0.25 * ya * (1.0 + xa * xi);
    }
  } else {
    const auto lx = detail::lagrange2(xi), ly = detail::lagrange2(eta);
    const auto dx = detail::lagrange2_d(xi), dy = detail::lagrange2_d(eta);
    for (int a = 0; a < 9; ++a) {
      const int i = kQ2NodeRef[a][0] + 1, j = kQ2NodeRef[a][1] + 1;
      s.N(a) = lx[i] * ly[j];
      s.dN(a, 0) = dx[i] * ly[j];
      s.dN(a, 1) = lx[i] * dy[j];
    }
  }
  return s;
}

// ----------------------------------------------------------------------------
// Geometry and derivative operators
// ----------------------------------------------------------------------------

using ElementCoords = Eigen::Matrix<double, 9, 2>;

inline ElementCoords element_coords(const Mesh& mesh, std::size_t e) {
  ElementCoords X;
  for (int a = 0; a < 9; ++a) X.row(a) = mesh.node(mesh.element(e).nodes[a]).transpose();
  return X;
}

/// Isoparametric Jacobian dx/dxi (rows: physical x,y; cols: xi, eta).
inline Eigen::Matrix2d jacobian(const ShapeEval<Order::Q2>& q2, const ElementCoords& X) {
  return X.transpose() * q2.dN;
}

/**
 * Physical-coordinate derivative operators at one point, interleaved u ordering
 * (ux0, uy0, ux1, uy1, ...):
 *   strain  (3x18): rows exx, eyy, gxy
 *   curl    (1x18): [-dN/dy, dN/dx] per node, so curl * u = d(uy)/dx - d(ux)/dy
 *   curvature (2x4): [-dN/dy; dN/dx] per corner, acting on the rotation field
 */
struct BMatrices {
  Eigen::Matrix<double, 3, 18> strain;
  Eigen::Matrix<double, 1, 18> curl;
  Eigen::Matrix<double, 2, 4> curvature;
  double det_j = 0.0;
};

inline BMatrices b_matrices(const ShapeEval<Order::Q2>& q2, const ShapeEval<Order::Q1>& q1,
                            const Eigen::Matrix2d& J) {
  BMatrices b;
  b.det_j = J.determinant();
  if (!(b.det_j > 0.0)) throw InputError("singular or inverted element Jacobian");
  const Eigen::Matrix2d Jinv = J.inverse();
  // Rows of dN * J^{-1} are (dN/dx, dN/dy).
  const Eigen::Matrix<double, 9, 2> g2 = q2.dN * Jinv;
  const Eigen::Matrix<double, 4, 2> g1 = q1.dN * Jinv;

  b.strain.setZero();
  for (int a = 0; a < 9; ++a) {
    const double dx = g2(a, 0), dy = g2(a, 1);
    b.strain(0, 2 * a) = dx;
    b.strain(1, 2 * a + 1) = dy;
    b.strain(2, 2 * a) = dy;
    b.strain(2, 2 * a + 1) = dx;
    b.curl(0, 2 * a) = -dy;
    b.curl(0, 2 * a + 1) = dx;
  }
  for (int a = 0; a < 4; ++a) {
    b.curvature(0, a) = -g1(a, 1);
    b.curvature(1, a) = g1(a, 0);
  }
  return b;
}

// ----------------------------------------------------------------------------
// Element matrices
// ----------------------------------------------------------------------------

struct ElementMatrices {
  Eigen::Matrix<double, 18, 18> k_uu;
  Eigen::Matrix<double, 18, 18> m_uu;
  Eigen::Matrix<double, 18, 1> k_us;  ///< integral of curl^T * 1
  Eigen::Matrix<double, 4, 4> k_tt;
  Eigen::Matrix<double, 4, 1> k_ts;   ///< integral of 2 * N_theta * 1

  /// Row r of the u blocks belongs to local node r / 2, component r % 2.
  static constexpr int node_of_row(int r) { return r / 2; }
  static constexpr int component_of_row(int r) { return r % 2; }
};

/// Interleaved 2x18 interpolation matrix for the displacement field.
inline Eigen::Matrix<double, 2, 18> displacement_interp(const ShapeEval<Order::Q2>& q2) {
  Eigen::Matrix<double, 2, 18> Nu = Eigen::Matrix<double, 2, 18>::Zero();
  for (int a = 0; a < 9; ++a) {
    Nu(0, 2 * a) = q2.N(a);
    Nu(1, 2 * a + 1) = q2.N(a);
  }
  return Nu;
}

template <int QuadPoints = 3>
ElementMatrices local_matrices(const ElementCoords& X, const Material& m) {
  const auto cv = voigt_matrices(m);
  const auto rule = gauss_legendre<QuadPoints>();

  ElementMatrices em;
  em.k_uu.setZero();
  em.m_uu.setZero();
  em.k_us.setZero();
  em.k_tt.setZero();
  em.k_ts.setZero();

  for (int i = 0; i < QuadPoints; ++i) {
    for (int j = 0; j < QuadPoints; ++j) {
      const auto q2 = shape<Order::Q2>(rule.x[i], rule.x[j]);
      const auto q1 = shape<Order::Q1>(rule.x[i], rule.x[j]);
      const auto b = b_matrices(q2, q1, jacobian(q2, X));
      const double dv = b.det_j * rule.w[i] * rule.w[j];
      const auto Nu = displacement_interp(q2);

      em.k_uu.noalias() += b.strain.transpose() * cv.C * b.strain * dv;
      em.m_uu.noalias() += m.rho * Nu.transpose() * Nu * dv;
      em.k_us.noalias() += b.curl.transpose() * dv;
      em.k_tt.noalias() += b.curvature.transpose() * cv.D * b.curvature * dv;
      em.k_ts.noalias() += 2.0 * q1.N * dv;
    }
  }
  return em;
}

template <int QuadPoints = 3>
ElementMatrices local_matrices(const Mesh& mesh, std::size_t e, const Material& m) {
  return local_matrices<QuadPoints>(element_coords(mesh, e), m);
}

}  // namespace ccst
