#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ccst/element.hpp"
#include "ccst/errors.hpp"
#include "ccst/material.hpp"
#include "ccst/mesh.hpp"

namespace ccst {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/**
 * Boundary data for one side of the rectangle.
 *
 * A component either has a prescribed value (Dirichlet) or receives the
 * constant traction given here (Neumann); a nonzero traction on a prescribed
 * component is rejected. The same holds for the rotation and couple-traction.
 */
struct BoundaryTag {
  Side side = Side::left;
  std::optional<double> ux, uy, theta;
  Eigen::Vector2d traction = Eigen::Vector2d::Zero();  ///< force per unit length
  double couple_traction = 0.0;                        ///< moment per unit length

  static BoundaryTag clamped(Side s) {
    BoundaryTag t;
    t.side = s;
    t.ux = 0.0;
    t.uy = 0.0;
    t.theta = 0.0;
    return t;
  }
};

using BodyForce = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;

/// Partition of the three DOF families into free and prescribed sets.
class DofMap {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  DofMap() = default;
  DofMap(std::size_t n_u, std::size_t n_theta, std::size_t n_s,
         const std::map<std::size_t, double>& fixed_u,
         const std::map<std::size_t, double>& fixed_theta)
      : n_u_all_(n_u), n_t_all_(n_theta), n_s_(n_s) {
    partition(n_u, fixed_u, u_free_, u_index_, u_fixed_, u_values_);
    partition(n_theta, fixed_theta, t_free_, t_index_, t_fixed_, t_values_);
  }

  [[nodiscard]] std::size_t n_u_all() const { return n_u_all_; }
  [[nodiscard]] std::size_t n_theta_all() const { return n_t_all_; }
  [[nodiscard]] std::size_t n_u() const { return u_free_.size(); }
  [[nodiscard]] std::size_t n_theta() const { return t_free_.size(); }
  [[nodiscard]] std::size_t n_s() const { return n_s_; }

  static std::size_t u_dof(std::size_t node, int component) { return 2 * node + std::size_t(component); }

  /// Free index of a full u DOF, or npos if prescribed.
  [[nodiscard]] std::size_t u_free_index(std::size_t dof) const { return u_index_[dof]; }
  [[nodiscard]] std::size_t theta_free_index(std::size_t corner) const { return t_index_[corner]; }

  [[nodiscard]] const std::vector<std::size_t>& u_free() const { return u_free_; }
  [[nodiscard]] const std::vector<std::size_t>& u_fixed() const { return u_fixed_; }
  [[nodiscard]] const std::vector<double>& u_fixed_values() const { return u_values_; }
  [[nodiscard]] const std::vector<std::size_t>& theta_free() const { return t_free_; }
  [[nodiscard]] const std::vector<std::size_t>& theta_fixed() const { return t_fixed_; }
  [[nodiscard]] const std::vector<double>& theta_fixed_values() const { return t_values_; }

  /// Full vector from free values plus prescribed values.
  [[nodiscard]] Vec expand_u(const Vec& free) const { return expand(free, n_u_all_, u_free_, u_fixed_, u_values_); }
  [[nodiscard]] Vec expand_theta(const Vec& free) const {
    return expand(free, n_t_all_, t_free_, t_fixed_, t_values_);
  }
  [[nodiscard]] Vec restrict_u(const Vec& full) const { return restrict(full, u_free_); }
  [[nodiscard]] Vec restrict_theta(const Vec& full) const { return restrict(full, t_free_); }

  /// Full vector holding only the prescribed values (zero on free DOFs).
  [[nodiscard]] Vec prescribed_u() const { return expand(Vec::Zero(Eigen::Index(n_u())), n_u_all_, u_free_, u_fixed_, u_values_); }
  [[nodiscard]] Vec prescribed_theta() const {
    return expand(Vec::Zero(Eigen::Index(n_theta())), n_t_all_, t_free_, t_fixed_, t_values_);
  }

  /// Selection matrix mapping full vectors onto free DOFs.
  [[nodiscard]] SpMat u_selector() const { return selector(u_free_, n_u_all_); }
  [[nodiscard]] SpMat theta_selector() const { return selector(t_free_, n_t_all_); }

 private:
  static void partition(std::size_t n, const std::map<std::size_t, double>& fixed,
                        std::vector<std::size_t>& free, std::vector<std::size_t>& index,
                        std::vector<std::size_t>& fixed_ids, std::vector<double>& values) {
    index.assign(n, npos);
    for (std::size_t i = 0; i < n; ++i) {
      if (auto it = fixed.find(i); it != fixed.end()) {
        fixed_ids.push_back(i);
        values.push_back(it->second);
      } else {
        index[i] = free.size();
        free.push_back(i);
      }
    }
  }

  static Vec expand(const Vec& free, std::size_t n, const std::vector<std::size_t>& free_ids,
                    const std::vector<std::size_t>& fixed_ids, const std::vector<double>& values) {
    if (std::size_t(free.size()) != free_ids.size())
      throw InputError("free vector has " + std::to_string(free.size()) + " entries, expected " +
                       std::to_string(free_ids.size()));
    Vec out = Vec::Zero(Eigen::Index(n));
    for (std::size_t i = 0; i < free_ids.size(); ++i) out(Eigen::Index(free_ids[i])) = free(Eigen::Index(i));
    for (std::size_t i = 0; i < fixed_ids.size(); ++i) out(Eigen::Index(fixed_ids[i])) = values[i];
    return out;
  }

  static Vec restrict(const Vec& full, const std::vector<std::size_t>& free_ids) {
    Vec out(Eigen::Index(free_ids.size()));
    for (std::size_t i = 0; i < free_ids.size(); ++i) out(Eigen::Index(i)) = full(Eigen::Index(free_ids[i]));
    return out;
  }

  static SpMat selector(const std::vector<std::size_t>& free_ids, std::size_t n) {
    SpMat P(Eigen::Index(free_ids.size()), Eigen::Index(n));
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(free_ids.size());
    for (std::size_t i = 0; i < free_ids.size(); ++i) t.emplace_back(Eigen::Index(i), Eigen::Index(free_ids[i]), 1.0);
    P.setFromTriplets(t.begin(), t.end());
    return P;
  }

  std::size_t n_u_all_ = 0, n_t_all_ = 0, n_s_ = 0;
  std::vector<std::size_t> u_free_, u_index_, u_fixed_;
  std::vector<double> u_values_;
  std::vector<std::size_t> t_free_, t_index_, t_fixed_;
  std::vector<double> t_values_;
};

/**
 * Assembled block system
 *
 *   [ Kuu   0    Kus ] [u]   [ M 0 0 ] [u'']   [ Fu ]
 *   [ 0    Ktt  -Kts ] [t] + [ 0 0 0 ] [ . ] = [ mt ]
 *   [ Ksu -Kst   0   ] [s]   [ 0 0 0 ] [ . ]   [ rs ]
 *
 * restricted to free DOFs. rs is zero unless nonzero values are prescribed.
 * The *_all members keep the unreduced matrices for reactions and recovery.
 */
struct GlobalSystem {
  Mesh mesh;
  Material material;
  DofMap dofs;

  SpMat Kuu, Muu, Kus, Ksu, Ktt, Kts, Kst;
  Vec Fu, mt, rs;

  SpMat Kuu_all, Muu_all, Kus_all, Ktt_all, Kts_all;
  Vec Fu_all, mt_all;

  // Rotation mass and half-curl coupling over the full DOF sets, used to
  // project 1/2 curl u onto the rotation space when the couple-stress terms
  // are absent.
  SpMat Mtt_all, Gtu_all;
};

namespace detail {

inline void fix(std::map<std::size_t, double>& fixed, std::size_t dof, double value, const char* what) {
  auto [it, inserted] = fixed.emplace(dof, value);
  if (!inserted && it->second != value)
    throw InputError(std::string("conflicting prescribed values for ") + what + " DOF " + std::to_string(dof) +
                     " (" + std::to_string(it->second) + " vs " + std::to_string(value) + ")");
}

// Local node numbers along edge k (start corner, end corner, midside) and the
// matching 1D quadratic-basis slot for each (coordinate -1, 1, 0).
inline std::array<int, 3> edge_nodes(int k) { return {k, (k + 1) % 4, 4 + k}; }

}  // namespace detail

inline GlobalSystem assemble(const Mesh& mesh, const Material& material, const std::vector<BoundaryTag>& tags,
                             const BodyForce& body_force = {}) {
  const std::size_t n_u = 2 * mesh.num_nodes();
  const std::size_t n_t = mesh.num_corners();
  const std::size_t n_s = mesh.num_elements();

  // Dirichlet data.
  std::map<std::size_t, double> fixed_u, fixed_t;
  for (const auto& tag : tags) {
    if ((tag.ux && tag.traction.x() != 0.0) || (tag.uy && tag.traction.y() != 0.0) ||
        (tag.theta && tag.couple_traction != 0.0))
      throw InputError("side " + std::string(to_string(tag.side)) +
                       " both prescribes and loads the same component");
    const auto bn = boundary_nodes(mesh, tag.side);
    for (std::size_t node : bn.q2) {
      if (tag.ux) detail::fix(fixed_u, DofMap::u_dof(node, 0), *tag.ux, "ux");
      if (tag.uy) detail::fix(fixed_u, DofMap::u_dof(node, 1), *tag.uy, "uy");
    }
    if (tag.theta)
      for (std::size_t c : bn.corners) detail::fix(fixed_t, c, *tag.theta, "theta");
  }
  if (material.eta > 0.0 && fixed_t.empty())
    throw InputError(
        "no rotation DOF is prescribed: the curvature stiffness has a constant-rotation null mode, "
        "fix theta on at least one side");

  GlobalSystem sys{.mesh = mesh, .material = material, .dofs = DofMap(n_u, n_t, n_s, fixed_u, fixed_t)};

  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> tk, tm, tus, ttt, tts, tmt, tgt;
  const std::size_t ne = mesh.num_elements();
  tk.reserve(ne * 324);
  tm.reserve(ne * 324);
  tus.reserve(ne * 18);
  ttt.reserve(ne * 16);
  tts.reserve(ne * 4);
  tmt.reserve(ne * 16);
  tgt.reserve(ne * 72);

  Vec F = Vec::Zero(Eigen::Index(n_u));
  Vec mt = Vec::Zero(Eigen::Index(n_t));
  const auto rule = gauss_legendre<3>();

  for (std::size_t e = 0; e < ne; ++e) {
    const Element& el = mesh.element(e);
    const ElementCoords X = element_coords(mesh, e);
    const ElementMatrices em = local_matrices(X, material);

    std::array<Eigen::Index, 18> ud;
    for (int a = 0; a < 9; ++a) {
      ud[2 * a] = Eigen::Index(DofMap::u_dof(el.nodes[a], 0));
      ud[2 * a + 1] = Eigen::Index(DofMap::u_dof(el.nodes[a], 1));
    }
    for (int r = 0; r < 18; ++r) {
      for (int c = 0; c < 18; ++c) {
        tk.emplace_back(ud[r], ud[c], em.k_uu(r, c));
        tm.emplace_back(ud[r], ud[c], em.m_uu(r, c));
      }
      tus.emplace_back(ud[r], Eigen::Index(e), em.k_us(r));
    }
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) ttt.emplace_back(Eigen::Index(el.corners[r]), Eigen::Index(el.corners[c]), em.k_tt(r, c));
      tts.emplace_back(Eigen::Index(el.corners[r]), Eigen::Index(e), em.k_ts(r));
    }

    // Rotation mass, half-curl coupling and body force share one quadrature loop.
    Eigen::Matrix4d mtt = Eigen::Matrix4d::Zero();
    Eigen::Matrix<double, 4, 18> gtu = Eigen::Matrix<double, 4, 18>::Zero();
    Eigen::Matrix<double, 18, 1> fe = Eigen::Matrix<double, 18, 1>::Zero();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const auto q2 = shape<Order::Q2>(rule.x[i], rule.x[j]);
        const auto q1 = shape<Order::Q1>(rule.x[i], rule.x[j]);
        const auto b = b_matrices(q2, q1, jacobian(q2, X));
        const double dv = b.det_j * rule.w[i] * rule.w[j];
        mtt.noalias() += q1.N * q1.N.transpose() * dv;
        gtu.noalias() += 0.5 * q1.N * b.curl * dv;
        if (body_force) {
          const Eigen::Vector2d x = X.transpose() * q2.N;
          fe.noalias() += displacement_interp(q2).transpose() * body_force(x) * dv;
        }
      }
    }
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) tmt.emplace_back(Eigen::Index(el.corners[r]), Eigen::Index(el.corners[c]), mtt(r, c));
      for (int c = 0; c < 18; ++c) tgt.emplace_back(Eigen::Index(el.corners[r]), ud[c], gtu(r, c));
    }
    if (body_force)
      for (int r = 0; r < 18; ++r) F(ud[r]) += fe(r);
  }

  // Neumann data: 3-point Gauss along each loaded edge.
  for (const auto& tag : tags) {
    const bool force = tag.traction.squaredNorm() > 0.0;
    const bool couple = tag.couple_traction != 0.0;
    if (!force && !couple) continue;
    for (auto [e, k] : boundary_edges(mesh, tag.side)) {
      const Element& el = mesh.element(e);
      const auto en = detail::edge_nodes(k);
      const double len = (mesh.node(el.nodes[en[1]]) - mesh.node(el.nodes[en[0]])).norm();
      for (int q = 0; q < 3; ++q) {
        const double t = rule.x[q];
        const double ds = 0.5 * len * rule.w[q];
        const auto l2 = detail::lagrange2(t);
        const std::array<double, 3> nq{l2[0], l2[2], l2[1]};  // start, end, mid
        if (force)
          for (int a = 0; a < 3; ++a)
            for (int comp = 0; comp < 2; ++comp)
              F(Eigen::Index(DofMap::u_dof(el.nodes[en[a]], comp))) += nq[a] * tag.traction(comp) * ds;
        if (couple) {
          const std::array<double, 2> n1{0.5 * (1.0 - t), 0.5 * (1.0 + t)};
          for (int a = 0; a < 2; ++a) mt(Eigen::Index(el.corners[en[a]])) += n1[a] * tag.couple_traction * ds;
        }
      }
    }
  }

  auto build = [](Eigen::Index r, Eigen::Index c, std::vector<Trip>& t) {
    SpMat m(r, c);
    m.setFromTriplets(t.begin(), t.end());
    std::vector<Trip>().swap(t);
    return m;
  };
  const auto nu = Eigen::Index(n_u), nt = Eigen::Index(n_t), ns = Eigen::Index(n_s);
  sys.Kuu_all = build(nu, nu, tk);
  sys.Muu_all = build(nu, nu, tm);
  sys.Kus_all = build(nu, ns, tus);
  sys.Ktt_all = build(nt, nt, ttt);
  sys.Kts_all = build(nt, ns, tts);
  sys.Mtt_all = build(nt, nt, tmt);
  sys.Gtu_all = build(nt, nu, tgt);
  sys.Fu_all = F;
  sys.mt_all = mt;

  // Elimination of prescribed DOFs with right-hand-side correction.
  const SpMat Pu = sys.dofs.u_selector();
  const SpMat Pt = sys.dofs.theta_selector();
  const Vec ubar = sys.dofs.prescribed_u();
  const Vec tbar = sys.dofs.prescribed_theta();

  sys.Kuu = Pu * sys.Kuu_all * Pu.transpose();
  sys.Muu = Pu * sys.Muu_all * Pu.transpose();
  sys.Kus = Pu * sys.Kus_all;
  sys.Ksu = SpMat(sys.Kus.transpose());
  sys.Ktt = Pt * sys.Ktt_all * Pt.transpose();
  sys.Kts = Pt * sys.Kts_all;
  sys.Kst = SpMat(sys.Kts.transpose());
  sys.Fu = Pu * (F - sys.Kuu_all * ubar);
  sys.mt = Pt * (mt - sys.Ktt_all * tbar);
  sys.rs = -(sys.Kus_all.transpose() * ubar) + sys.Kts_all.transpose() * tbar;
  return sys;
}

// ----------------------------------------------------------------------------
// Initial fields
// ----------------------------------------------------------------------------

using VectorField = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;
using ScalarField = std::function<double(const Eigen::Vector2d&)>;

/// Nodal interpolants on the full (unreduced) DOF sets.
struct NodalFields {
  Vec u;      ///< 2 * num_nodes, interleaved
  Vec v;      ///< 2 * num_nodes
  Vec theta;  ///< num_corners
  Vec s;      ///< num_elements, sampled at element centres
};

inline NodalFields apply_initial_fields(const Mesh& mesh, const VectorField& u0, const VectorField& v0,
                                        const ScalarField& theta0, const ScalarField& s0) {
  NodalFields f;
  const auto nn = Eigen::Index(mesh.num_nodes());
  f.u = Vec::Zero(2 * nn);
  f.v = Vec::Zero(2 * nn);
  f.theta = Vec::Zero(Eigen::Index(mesh.num_corners()));
  f.s = Vec::Zero(Eigen::Index(mesh.num_elements()));
  for (Eigen::Index n = 0; n < nn; ++n) {
    const auto& x = mesh.node(std::size_t(n));
    if (u0) f.u.segment<2>(2 * n) = u0(x);
    if (v0) f.v.segment<2>(2 * n) = v0(x);
  }
  if (theta0)
    for (std::size_t c = 0; c < mesh.num_corners(); ++c)
      f.theta(Eigen::Index(c)) = theta0(mesh.node(mesh.corner_node_ids()[c]));
  if (s0)
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) f.s(Eigen::Index(e)) = s0(mesh.element_center(e));
  return f;
}

}  // namespace ccst
