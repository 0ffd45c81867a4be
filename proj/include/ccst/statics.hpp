#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ccst/assembly.hpp"
#include "ccst/element.hpp"
#include "ccst/errors.hpp"
#include "ccst/linear_solvers.hpp"
#include "ccst/material.hpp"
#include "ccst/mesh.hpp"
#include "ccst/mms.hpp"
#include "ccst/parallel.hpp"

namespace ccst {

struct StaticSolution {
  Vec u, theta, s;           ///< free DOFs (s has no constraints)
  Vec u_full, theta_full;    ///< including prescribed values
  Vec reactions;             ///< one per entry of dofs.u_fixed()
};

namespace detail {

inline void append_block(std::vector<Eigen::Triplet<double>>& t, const SpMat& B, Eigen::Index r0, Eigen::Index c0,
                         double scale) {
  for (Eigen::Index k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
}

}  // namespace detail

/// Symmetric indefinite matrix [[Kuu, 0, Kus], [0, Ktt, -Kts], [Ksu, -Kst, 0]] on free DOFs.
inline SpMat fused_saddle_matrix(const GlobalSystem& sys) {
  const Eigen::Index nu = sys.Kuu.rows(), nt = sys.Ktt.rows(), ns = sys.Kus.cols();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(std::size_t(sys.Kuu.nonZeros() + sys.Ktt.nonZeros() + 2 * (sys.Kus.nonZeros() + sys.Kts.nonZeros())));
  detail::append_block(t, sys.Kuu, 0, 0, 1.0);
  detail::append_block(t, sys.Kus, 0, nu + nt, 1.0);
  detail::append_block(t, sys.Ktt, nu, nu, 1.0);
  detail::append_block(t, sys.Kts, nu, nu + nt, -1.0);
  detail::append_block(t, sys.Ksu, nu + nt, 0, 1.0);
  detail::append_block(t, sys.Kst, nu + nt, nu, -1.0);
  SpMat A(nu + nt + ns, nu + nt + ns);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

inline Vec fused_rhs(const GlobalSystem& sys) {
  Vec b(sys.Fu.size() + sys.mt.size() + sys.rs.size());
  b << sys.Fu, sys.mt, sys.rs;
  return b;
}

/// L2 projection of 1/2 curl u onto the free rotation DOFs.
inline Vec project_rotation(const GlobalSystem& sys, const Vec& u_full) {
  const SpMat Pt = sys.dofs.theta_selector();
  if (Pt.rows() == 0) return Vec();
  const SpMat M = Pt * sys.Mtt_all * Pt.transpose();
  const Vec rhs = Pt * (sys.Gtu_all * u_full - sys.Mtt_all * sys.dofs.prescribed_theta());
  return SpdFactor(M, "rotation mass matrix").solve(rhs);
}

inline void finish_solution(const GlobalSystem& sys, StaticSolution& sol) {
  sol.u_full = sys.dofs.expand_u(sol.u);
  sol.theta_full = sys.dofs.expand_theta(sol.theta);
  const Vec r = sys.Kuu_all * sol.u_full + sys.Kus_all * sol.s - sys.Fu_all;
  const auto& fixed = sys.dofs.u_fixed();
  sol.reactions.resize(Eigen::Index(fixed.size()));
  for (std::size_t i = 0; i < fixed.size(); ++i) sol.reactions(Eigen::Index(i)) = r(Eigen::Index(fixed[i]));
}

/**
 * Static solve of the block system with zero acceleration.
 *
 * With eta > 0 the fused saddle matrix is factored directly. With eta = 0 the
 * rotation block vanishes and the fused matrix is singular in theta, so the
 * displacement comes from the classical stiffness alone, s = 0, and theta is
 * the L2 projection of 1/2 curl u.
 */
inline StaticSolution solve_static(const GlobalSystem& sys) {
  StaticSolution sol;
  const Eigen::Index nu = sys.Kuu.rows(), nt = sys.Ktt.rows(), ns = sys.Kus.cols();
  if (sys.material.classical()) {
    sol.u = SpdFactor(sys.Kuu, "Kuu").solve(sys.Fu);
    sol.s = Vec::Zero(ns);
    sol.theta = project_rotation(sys, sys.dofs.expand_u(sol.u));
  } else {
    const SaddleFactor lu(fused_saddle_matrix(sys), "the static saddle matrix");
    const Vec x = lu.solve(fused_rhs(sys));
    sol.u = x.head(nu);
    sol.theta = x.segment(nu, nt);
    sol.s = x.tail(ns);
  }
  finish_solution(sys, sol);
  return sol;
}

/// ||A x - b|| / ||b|| for the fused static system (b = 0 gives the absolute residual).
inline double static_residual(const GlobalSystem& sys, const StaticSolution& sol) {
  Vec x(sol.u.size() + sol.theta.size() + sol.s.size());
  x << sol.u, sol.theta, sol.s;
  const Vec b = fused_rhs(sys);
  const double r = (fused_saddle_matrix(sys) * x - b).norm();
  return b.norm() > 0.0 ? r / b.norm() : r;
}

// ----------------------------------------------------------------------------
// Cantilever rigidity
// ----------------------------------------------------------------------------

struct CantileverSetup {
  double E = 2.0, nu = 0.0, rho = 1.0;
  double height = 1.0;
  double length = 20.0;
  std::size_t nx = 40, ny = 4;
  double load = 1.0;  ///< total vertical force on the free end
};

struct CantileverResult {
  double h_over_l = 0, eta = 0, l = 0;
  double stiffness = 0;            ///< load / mean tip deflection
  double classical_stiffness = 0;  ///< 3 E I / L^3
  double ratio = 0;
  double reaction_y = 0;           ///< sum of vertical reactions on the clamp
  StaticSolution solution;
};

inline double classical_tip_stiffness(const CantileverSetup& c) {
  const double I = c.height * c.height * c.height / 12.0;
  return 3.0 * c.E * I / (c.length * c.length * c.length);
}

/// Left edge clamped in u and theta, uniform shear traction on the right edge.
inline std::vector<BoundaryTag> cantilever_tags(const CantileverSetup& c) {
  BoundaryTag load;
  load.side = Side::right;
  load.traction = {0.0, c.load / c.height};
  return {BoundaryTag::clamped(Side::left), load};
}

/// Average of a nodal component over a side, integrated with the Q2 edge basis.
inline double side_mean(const Mesh& mesh, const Vec& u_full, Side side, int component) {
  const auto rule = gauss_legendre<3>();
  double integral = 0.0, length = 0.0;
  for (auto [e, k] : boundary_edges(mesh, side)) {
    const Element& el = mesh.element(e);
    const auto en = detail::edge_nodes(k);
    const double len = (mesh.node(el.nodes[en[1]]) - mesh.node(el.nodes[en[0]])).norm();
    for (int q = 0; q < 3; ++q) {
      const auto l2 = detail::lagrange2(rule.x[q]);
      const std::array<double, 3> nq{l2[0], l2[2], l2[1]};
      double v = 0.0;
      for (int a = 0; a < 3; ++a) v += nq[a] * u_full(Eigen::Index(DofMap::u_dof(el.nodes[en[a]], component)));
      integral += v * 0.5 * len * rule.w[q];
    }
    length += len;
  }
  return integral / length;
}

inline CantileverResult cantilever_stiffness(const CantileverSetup& c, double eta) {
  const Material m = derive(c.E, c.nu, c.rho, eta);
  const Mesh mesh = build_rect_mesh(c.length, c.height, c.nx, c.ny);
  const GlobalSystem sys = assemble(mesh, m, cantilever_tags(c));

  CantileverResult r;
  r.eta = eta;
  r.l = m.l;
  r.h_over_l = m.l > 0.0 ? c.height / m.l : std::numeric_limits<double>::infinity();
  r.solution = solve_static(sys);
  r.stiffness = c.load / side_mean(mesh, r.solution.u_full, Side::right, 1);
  r.classical_stiffness = classical_tip_stiffness(c);
  r.ratio = r.stiffness / r.classical_stiffness;
  const auto& fixed = sys.dofs.u_fixed();
  for (std::size_t i = 0; i < fixed.size(); ++i)
    if (fixed[i] % 2 == 1) r.reaction_y += r.solution.reactions(Eigen::Index(i));
  return r;
}

struct RigidityRow {
  double h_over_l, eta, stiffness, ratio;
};

/// eta = mu (h / ratio)^2 for each target h/l, solved independently.
inline std::vector<RigidityRow> rigidity_sweep(const CantileverSetup& c, const std::vector<double>& h_over_l,
                                               std::size_t threads = 1) {
  const double mu = derive(c.E, c.nu, c.rho, 0.0).mu;
  return parallel_map(
      h_over_l.size(),
      [&](std::size_t i) {
        const double target = h_over_l[i];
        if (!(target > 0.0)) throw InputError("h_over_l values must be positive");
        const double l = c.height / target;
        const auto r = cantilever_stiffness(c, mu * l * l);
        return RigidityRow{target, r.eta, r.stiffness, r.ratio};
      },
      threads);
}

// ----------------------------------------------------------------------------
// Manufactured-solution convergence
// ----------------------------------------------------------------------------

struct MmsRow {
  double mesh_size = 0;
  std::size_t per_side = 0, elements = 0;
  double l2_error = 0, l2_relative = 0;
};

/// Mesh sizes 10^(-k/4), k = 1..8.
inline std::vector<double> default_mms_sizes() {
  std::vector<double> h;
  for (int k = 1; k <= 8; ++k) h.push_back(std::pow(10.0, -0.25 * k));
  return h;
}

inline std::size_t elements_per_side(double mesh_size) {
  if (!(mesh_size > 0.0) || mesh_size > 1.0) throw InputError("MMS mesh sizes must lie in (0, 1]");
  return std::size_t(std::ceil(1.0 / mesh_size - 1e-9));
}

/// ||u_h - u|| and ||u|| in L2 over the mesh with 3x3 Gauss points per element.
inline std::pair<double, double> l2_error(const Mesh& mesh, const Vec& u_full,
                                          const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& exact) {
  const auto rule = gauss_legendre<3>();
  double err = 0.0, ref = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Element& el = mesh.element(e);
    const ElementCoords X = element_coords(mesh, e);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const auto q2 = shape<Order::Q2>(rule.x[i], rule.x[j]);
        const double dv = jacobian(q2, X).determinant() * rule.w[i] * rule.w[j];
        Eigen::Vector2d uh = Eigen::Vector2d::Zero();
        for (int a = 0; a < 9; ++a) uh += q2.N(a) * u_full.segment<2>(Eigen::Index(2 * el.nodes[a]));
        const Eigen::Vector2d ue = exact(X.transpose() * q2.N);
        err += (uh - ue).squaredNorm() * dv;
        ref += ue.squaredNorm() * dv;
      }
    }
  }
  return {std::sqrt(err), std::sqrt(ref)};
}

inline MmsRow mms_case(std::size_t per_side, const Material& m) {
  const Mesh mesh = build_rect_mesh(1.0, 1.0, per_side, per_side);
  std::vector<BoundaryTag> tags;
  for (Side s : kAllSides) tags.push_back(BoundaryTag::clamped(s));
  const GlobalSystem sys = assemble(mesh, m, tags, [&m](const Eigen::Vector2d& x) { return mms::body_force(m, x); });
  const StaticSolution sol = solve_static(sys);
  const auto [err, ref] = l2_error(mesh, sol.u_full, mms::displacement);
  MmsRow row;
  row.mesh_size = 1.0 / double(per_side);
  row.per_side = per_side;
  row.elements = per_side * per_side;
  row.l2_error = err;
  row.l2_relative = err / ref;
  return row;
}

inline std::vector<MmsRow> mms_static(const std::vector<double>& mesh_sizes, const Material& m,
                                      std::size_t threads = 1) {
  return parallel_map(
      mesh_sizes.size(),
      [&](std::size_t i) {
        MmsRow row = mms_case(elements_per_side(mesh_sizes[i]), m);
        row.mesh_size = mesh_sizes[i];
        return row;
      },
      threads);
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Default MMS material: E = 1, nu = 0.29, rho = 1, eta = 0.001.
inline Material default_mms_material() { return derive(1.0, 0.29, 1.0, 0.001); }

/// Rows whose mesh resolves the manufactured wave with at least 8 elements per wavelength.
inline std::vector<MmsRow> mms_linear_region(const std::vector<MmsRow>& rows) {
  const double wavelength = 2.0 * std::numbers::pi / mms::kWave;
  std::vector<MmsRow> out;
  for (const auto& r : rows)
    if (1.0 / double(r.per_side) <= wavelength / 8.0 + 1e-12) out.push_back(r);
  return out;
}

/// Slope of log(error) against log(elements per side) over the linear region.
inline double mms_convergence_slope(const std::vector<MmsRow>& rows) {
  const auto lin = mms_linear_region(rows);
  std::vector<double> n, e;
  for (const auto& r : lin) {
    n.push_back(double(r.per_side));
    e.push_back(r.l2_error);
  }
  return loglog_slope(n, e);
}

}  // namespace ccst
