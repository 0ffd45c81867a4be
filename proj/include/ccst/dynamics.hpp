#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ccst/assembly.hpp"
#include "ccst/errors.hpp"
#include "ccst/linear_solvers.hpp"
#include "ccst/material.hpp"
#include "ccst/statics.hpp"

namespace ccst {

using Mat = Eigen::MatrixXd;

struct CondenseOptions {
  std::size_t dense_limit = 20000;  ///< form C2, C3 explicitly up to this many free u DOFs
  double cg_tolerance = 1e-12;      ///< relative residual of the composed marching solve
  std::size_t cg_max_iterations = 5000;
};

/**
 * Displacement-only operators left after eliminating theta and s:
 *
 *   C1 = Kst Ktt^-1 mt (+ rs)    C2 = Kst Ktt^-1 Kts
 *   C3 = Kuu + Kus C2^-1 Ksu     C4 = Fu + Kus C2^-1 C1
 *
 * and the marching matrix A = M + dt^2 C3. Small systems hold C2, C3 and A as
 * dense factored matrices. Large ones apply C3 through a sparse LU of the
 * rotation/multiplier block and solve with A by preconditioned CG, using the
 * factored eta = 0 marching matrix M + dt^2 Kuu as preconditioner.
 *
 * The classical variant has C3 = Kuu, C4 = Fu and no rotation blocks.
 */
class CondensedOperators {
 public:
  [[nodiscard]] double dt() const { return dt_; }
  [[nodiscard]] bool classical() const { return classical_; }
  [[nodiscard]] bool dense() const { return dense_; }
  [[nodiscard]] Eigen::Index size() const { return Muu_.rows(); }

  [[nodiscard]] const Vec& c1() const { return c1_; }
  [[nodiscard]] const Vec& c4() const { return c4_; }
  [[nodiscard]] const SpMat& mass() const { return Muu_; }

  /// Explicit C2; only available on the dense path.
  [[nodiscard]] const Mat& c2() const {
    if (!dense_ || classical_) throw SolverError("C2 is only formed explicitly on the dense C-CST path");
    return C2_;
  }
  /// Explicit C3; only available on the dense path.
  [[nodiscard]] const Mat& c3() const {
    if (!dense_ || classical_) throw SolverError("C3 is only formed explicitly on the dense C-CST path");
    return C3_;
  }

  [[nodiscard]] Vec apply_c3(const Vec& x) const {
    if (classical_) return Kuu_ * x;
    if (dense_) return C3_ * x;
    return Kuu_ * x + Kus_ * c2_solve(Ksu_ * x);
  }

  [[nodiscard]] Vec apply_mass(const Vec& x) const { return Muu_ * x; }
  [[nodiscard]] Vec solve_mass(const Vec& b) const { return mass_->solve(b); }

  /// x = A^-1 b with A = M + dt^2 C3.
  [[nodiscard]] Vec solve_march(const Vec& b) const {
    if (classical_) return sparse_march_->solve(b);
    if (dense_) return dense_march_->solve(b);
    return pcg(b);
  }

  /// A solver for C3 x = b (built on demand, used by the eigensolver).
  [[nodiscard]] std::function<Vec(const Vec&)> c3_solver() const {
    if (classical_) {
      auto f = std::make_shared<SpdFactor>(Kuu_, "Kuu");
      return [f](const Vec& b) -> Vec { return f->solve(b); };
    }
    if (dense_) {
      auto f = std::make_shared<Eigen::LLT<Mat>>(C3_);
      if (f->info() != Eigen::Success) throw SolverError("C3 is not positive definite; is the body constrained?");
      return [f](const Vec& b) -> Vec { return f->solve(b); };
    }
    // u block of the fused saddle system with right-hand side [b; 0; 0].
    auto f = std::make_shared<SaddleFactor>(fused_, "the fused saddle matrix");
    const Eigen::Index nu = size(), rest = fused_.rows() - nu;
    return [f, nu, rest](const Vec& b) -> Vec {
      Vec rhs = Vec::Zero(nu + rest);
      rhs.head(nu) = b;
      return f->solve(rhs).col(0).head(nu);
    };
  }

  /// (theta, s) on free DOFs for a free displacement vector.
  [[nodiscard]] std::pair<Vec, Vec> recover(const Vec& u) const {
    if (classical_) throw SolverError("the classical operators carry no rotation or multiplier blocks");
    const Vec s = c2_solve(Ksu_ * u - c1_);
    const Vec theta = ktt_->solve(mt_ + Kts_ * s);
    return {theta, s};
  }

  friend CondensedOperators condense(const GlobalSystem& sys, double dt, const CondenseOptions& opt);
  friend CondensedOperators classical_operators(const GlobalSystem& sys, double dt);

 private:
  [[nodiscard]] Vec c2_solve(const Vec& y) const {
    if (dense_) return c2_llt_->solve(y);
    const Eigen::Index nt = Kts_.rows(), ns = Kts_.cols();
    Vec rhs = Vec::Zero(nt + ns);
    rhs.tail(ns) = y;
    return constraint_lu_->solve(rhs).col(0).tail(ns);
  }

  [[nodiscard]] Vec pcg(const Vec& b) const {
    const double bnorm = b.norm();
    Vec x = Vec::Zero(b.size());
    if (bnorm == 0.0) return x;
    auto A = [this](const Vec& v) -> Vec { return Muu_ * v + dt_ * dt_ * apply_c3(v); };
    Vec r = b;
    Vec z = sparse_march_->solve(r);
    Vec p = z;
    double rz = r.dot(z);
    for (std::size_t it = 0; it < opt_.cg_max_iterations; ++it) {
      const Vec Ap = A(p);
      const double alpha = rz / p.dot(Ap);
      x += alpha * p;
      r -= alpha * Ap;
      if (r.norm() <= opt_.cg_tolerance * bnorm) return x;
      z = sparse_march_->solve(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    throw SolverError("preconditioned CG on the marching matrix did not converge in " +
                      std::to_string(opt_.cg_max_iterations) + " iterations");
  }

  double dt_ = 0.0;
  bool classical_ = false, dense_ = true;
  CondenseOptions opt_;

  SpMat Muu_, Kuu_, Kus_, Ksu_, Kts_;
  Vec mt_, c1_, c4_;
  std::shared_ptr<SpdFactor> mass_, ktt_, sparse_march_;

  // dense path
  Mat C2_, C3_;
  std::shared_ptr<Eigen::LLT<Mat>> c2_llt_, dense_march_;

  // composed path
  std::shared_ptr<SaddleFactor> constraint_lu_;
  SpMat fused_;
};

namespace detail {

inline void check_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("time.dt = " + std::to_string(dt) + " must be positive");
}

inline std::shared_ptr<SpdFactor> rotation_factor(const GlobalSystem& sys) {
  try {
    return std::make_shared<SpdFactor>(sys.Ktt, "Ktt");
  } catch (const SolverError&) {
    throw SolverError(
        "Ktt is singular: the constant-rotation mode is free. Prescribe theta on at least one side "
        "(e.g. theta = 0 on the clamped edge)");
  }
}

}  // namespace detail

inline CondensedOperators condense(const GlobalSystem& sys, double dt, const CondenseOptions& opt = {}) {
  if (sys.material.classical())
    throw InputError("condense needs eta > 0; with eta = 0 use the classical twin (classical_operators)");
  detail::check_dt(dt);

  CondensedOperators ops;
  ops.dt_ = dt;
  ops.opt_ = opt;
  ops.dense_ = std::size_t(sys.Kuu.rows()) <= opt.dense_limit;
  ops.Muu_ = sys.Muu;
  ops.Kuu_ = sys.Kuu;
  ops.Kus_ = sys.Kus;
  ops.Ksu_ = sys.Ksu;
  ops.Kts_ = sys.Kts;
  ops.mt_ = sys.mt;
  ops.mass_ = std::make_shared<SpdFactor>(sys.Muu, "Muu");
  ops.ktt_ = detail::rotation_factor(sys);

  const Vec ktt_mt = ops.ktt_->solve(sys.mt);
  ops.c1_ = sys.Kst * ktt_mt + sys.rs;

  if (ops.dense_) {
    const Mat X = ops.ktt_->solve(Mat(sys.Kts));
    ops.C2_ = sys.Kst * X;
    ops.C2_ = (0.5 * (ops.C2_ + ops.C2_.transpose())).eval();
    ops.c2_llt_ = std::make_shared<Eigen::LLT<Mat>>(ops.C2_);
    if (ops.c2_llt_->info() != Eigen::Success)
      throw SolverError("C2 is singular (" + std::to_string(sys.Kts.cols()) + " multipliers, " +
                        std::to_string(sys.Kts.rows()) +
                        " free rotations): prescribing theta at every domain corner leaves a checkerboard "
                        "multiplier mode; release theta on at least one side");
    const Mat Y = ops.c2_llt_->solve(Mat(sys.Ksu));
    ops.C3_ = Mat(sys.Kuu) + sys.Kus * Y;
    ops.C3_ = (0.5 * (ops.C3_ + ops.C3_.transpose())).eval();
    ops.c4_ = sys.Fu + sys.Kus * ops.c2_llt_->solve(ops.c1_);
    ops.dense_march_ = std::make_shared<Eigen::LLT<Mat>>(Mat(sys.Muu) + dt * dt * ops.C3_);
    if (ops.dense_march_->info() != Eigen::Success)
      throw SolverError("marching matrix M + dt^2 C3 is not positive definite");
  } else {
    const Eigen::Index nt = sys.Ktt.rows(), ns = sys.Kts.cols();
    std::vector<Eigen::Triplet<double>> t;
    detail::append_block(t, sys.Ktt, 0, 0, 1.0);
    detail::append_block(t, sys.Kts, 0, nt, -1.0);
    detail::append_block(t, sys.Kst, nt, 0, 1.0);
    SpMat B(nt + ns, nt + ns);
    B.setFromTriplets(t.begin(), t.end());
    ops.constraint_lu_ = std::make_shared<SaddleFactor>(B, "the rotation/multiplier block");
    ops.fused_ = fused_saddle_matrix(sys);
    ops.sparse_march_ = std::make_shared<SpdFactor>(SpMat(sys.Muu + dt * dt * sys.Kuu), "M + dt^2 Kuu");
    ops.c4_ = sys.Fu + sys.Kus * ops.c2_solve(ops.c1_);
  }
  return ops;
}

/// Marching operators of classical elasticity: C3 = Kuu, C4 = Fu.
inline CondensedOperators classical_operators(const GlobalSystem& sys, double dt) {
  detail::check_dt(dt);
  CondensedOperators ops;
  ops.dt_ = dt;
  ops.classical_ = true;
  ops.dense_ = false;
  ops.Muu_ = sys.Muu;
  ops.Kuu_ = sys.Kuu;
  ops.mass_ = std::make_shared<SpdFactor>(sys.Muu, "Muu");
  ops.sparse_march_ = std::make_shared<SpdFactor>(SpMat(sys.Muu + dt * dt * sys.Kuu), "M + dt^2 Kuu");
  ops.c1_ = Vec::Zero(sys.Kus.cols());
  ops.c4_ = sys.Fu;
  return ops;
}

/// The eta = 0 counterpart of a C-CST problem: same mesh, constants and boundary tags.
struct ClassicalTwin {
  GlobalSystem system;
  CondensedOperators ops;
};

inline ClassicalTwin classical_twin(const Mesh& mesh, const Material& material, const std::vector<BoundaryTag>& tags,
                                    double dt, const BodyForce& body_force = {}) {
  const Material m0 = derive(material.E, material.nu, material.rho, 0.0);
  GlobalSystem sys = assemble(mesh, m0, tags, body_force);
  CondensedOperators ops = classical_operators(sys, dt);
  return {std::move(sys), std::move(ops)};
}

/// C-CST operators when eta > 0, classical ones otherwise.
inline CondensedOperators operators_for(const GlobalSystem& sys, double dt, const CondenseOptions& opt = {}) {
  return sys.material.classical() ? classical_operators(sys, dt) : condense(sys, dt, opt);
}

// ----------------------------------------------------------------------------
// Time marching
// ----------------------------------------------------------------------------

struct MarchState {
  Vec u_prev, u_curr;  ///< free DOFs at steps n-1 and n
  std::size_t step = 0;
  double t = 0.0;
};

enum class StartRule {
  taylor,      ///< u^-1 = u0 - dt v0 + dt^2/2 a0, a0 = M^-1 (C4 - C3 u0)
  first_order  ///< u^-1 = u0 - dt v0
};

inline MarchState bootstrap(const CondensedOperators& ops, const Vec& u0, const Vec& v0,
                            StartRule rule = StartRule::taylor) {
  if (u0.size() != ops.size() || v0.size() != ops.size())
    throw InputError("initial fields do not match the free displacement DOF count");
  const double dt = ops.dt();
  MarchState s;
  s.u_curr = u0;
  s.u_prev = u0 - dt * v0;
  if (rule == StartRule::taylor) {
    const Vec a0 = ops.solve_mass(ops.c4() - ops.apply_c3(u0));
    s.u_prev += 0.5 * dt * dt * a0;
  }
  return s;
}

/// u^{n+1} = A^-1 (dt^2 C4 + M (2 u^n - u^{n-1})).
inline MarchState step(const CondensedOperators& ops, const MarchState& s) {
  const double dt = ops.dt();
  // A (u+ - w) = dt^2 (C4 - C3 w) with w = 2u - u_prev; same update as
  // A u+ = dt^2 C4 + M w, but an equilibrium stays put to its own residual.
  const Vec w = 2.0 * s.u_curr - s.u_prev;
  const Vec rhs = dt * dt * (ops.c4() - ops.apply_c3(w));
  MarchState next;
  next.u_prev = s.u_curr;
  next.u_curr = w + ops.solve_march(rhs);
  if (!next.u_curr.allFinite()) throw SolverError("time step produced non-finite displacements");
  next.step = s.step + 1;
  next.t = double(next.step) * dt;
  return next;
}

struct RecoveredFields {
  Vec theta, s;  ///< free DOFs
};

/// theta and s from a free displacement vector. The classical twin returns the
/// projected rotation 1/2 curl u and s = 0.
inline RecoveredFields recover_fields(const CondensedOperators& ops, const GlobalSystem& sys, const Vec& u) {
  if (ops.classical())
    return {project_rotation(sys, sys.dofs.expand_u(u)), Vec::Zero(sys.Kus.cols())};
  auto [theta, s] = ops.recover(u);
  return {std::move(theta), std::move(s)};
}

struct Energy {
  double kinetic = 0, strain = 0, curvature = 0, total = 0;
};

/// Kinetic energy from the backward velocity (u^n - u^{n-1}) / dt, strain from
/// Kuu, curvature from Ktt and the recovered rotation.
inline Energy energy(const CondensedOperators& ops, const GlobalSystem& sys, const MarchState& s) {
  Energy e;
  const Vec v = (s.u_curr - s.u_prev) / ops.dt();
  e.kinetic = 0.5 * v.dot(sys.Muu * v);
  e.strain = 0.5 * s.u_curr.dot(sys.Kuu * s.u_curr);
  if (!ops.classical()) {
    const Vec theta = ops.recover(s.u_curr).first;
    e.curvature = 0.5 * theta.dot(sys.Ktt * theta);
  }
  e.total = e.kinetic + e.strain + e.curvature;
  return e;
}

// ----------------------------------------------------------------------------
// Eigenmodes
// ----------------------------------------------------------------------------

struct Mode {
  double omega = 0;  ///< angular frequency
  Vec phi;           ///< free DOFs, phi^T M phi = 1
};

struct EigenOptions {
  double tolerance = 1e-10;  ///< Ritz residual relative to the Ritz value
  std::uint64_t seed = 20240917;
};

namespace detail {

// Uniform (-1, 1) entries from a fixed-seed engine, independent of the standard
// library's distribution implementation.
inline Vec start_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 2.0 * double(gen() >> 11) * 0x1.0p-53 - 1.0;
  return v;
}

inline void fix_sign(Vec& phi) {
  Eigen::Index k = 0;
  phi.cwiseAbs().maxCoeff(&k);
  if (phi(k) < 0.0) phi = -phi;
}

}  // namespace detail

/**
 * The `count` smallest eigenpairs of C3 phi = omega^2 M phi.
 *
 * Shift-invert Lanczos at shift 0: the operator C3^-1 M is self-adjoint in the
 * M inner product and its largest eigenvalues are 1 / omega^2. The Krylov
 * basis is fully reorthogonalized and grows until every wanted Ritz pair meets
 * the residual tolerance. Modes come back sorted by omega, mass-normalized,
 * with the largest-magnitude entry positive.
 */
inline std::vector<Mode> eigenmodes(const CondensedOperators& ops, std::size_t count = 16,
                                    const EigenOptions& opt = {}) {
  if (count == 0) throw InputError("eigenmode count must be positive");
  const Eigen::Index n = ops.size();
  if (n == 0) throw InputError("no free displacement DOFs");
  const Eigen::Index want = std::min<Eigen::Index>(Eigen::Index(count), n);
  const auto c3_solve = ops.c3_solver();

  Mat Q(n, 0), MQ(n, 0);
  std::vector<double> alpha, beta;
  Vec q = detail::start_vector(n, opt.seed);
  Vec Mq = ops.apply_mass(q);
  double nrm = std::sqrt(q.dot(Mq));
  q /= nrm;
  Mq /= nrm;

  Eigen::SelfAdjointEigenSolver<Mat> tri;
  Eigen::Index m = 0;
  const Eigen::Index check_every = std::max<Eigen::Index>(want, 8);
  Eigen::Index next_check = std::min(n, 2 * want + 10);
  bool converged = false;

  while (m < n) {
    Q.conservativeResize(n, m + 1);
    MQ.conservativeResize(n, m + 1);
    Q.col(m) = q;
    MQ.col(m) = Mq;
    Vec w = c3_solve(Mq);
    const double a = Mq.dot(w);
    alpha.push_back(a);
    w -= a * q;
    if (m > 0) w -= beta.back() * Q.col(m - 1);
    for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(m + 1) * (MQ.leftCols(m + 1).transpose() * w);
    Vec Mw = ops.apply_mass(w);
    const double b = std::sqrt(std::max(w.dot(Mw), 0.0));
    ++m;

    const bool exhausted = b <= 1e-14 * std::abs(alpha.front()) || m == n;
    if (m >= next_check || exhausted) {
      Mat T = Mat::Zero(m, m);
      for (Eigen::Index i = 0; i < m; ++i) {
        T(i, i) = alpha[std::size_t(i)];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[std::size_t(i)];
      }
      tri.compute(T);
      if (tri.info() != Eigen::Success) throw SolverError("tridiagonal eigensolve failed in Lanczos");
      converged = m >= want;
      for (Eigen::Index k = 0; k < want && converged; ++k) {
        const Eigen::Index col = m - 1 - k;  // ascending order: largest Ritz values last
        const double ritz = tri.eigenvalues()(col);
        if (!(ritz > 0.0)) throw SolverError("C3 is not positive definite; is the body constrained?");
        if (!exhausted && std::abs(b * tri.eigenvectors()(m - 1, col)) > opt.tolerance * ritz) converged = false;
      }
      if (converged || exhausted) break;
      next_check = std::min(n, m + check_every);
    }
    beta.push_back(b);
    q = w / b;
    Mq = Mw / b;
  }
  if (!converged) throw SolverError("Lanczos eigensolve did not converge for " + std::to_string(want) + " modes");

  std::vector<Mode> modes;
  for (Eigen::Index k = 0; k < want; ++k) {
    const Eigen::Index col = m - 1 - k;
    Mode md;
    md.omega = 1.0 / std::sqrt(tri.eigenvalues()(col));
    md.phi = Q.leftCols(m) * tri.eigenvectors().col(col);
    md.phi /= std::sqrt(md.phi.dot(ops.apply_mass(md.phi)));
    detail::fix_sign(md.phi);
    modes.push_back(std::move(md));
  }
  return modes;
}

/// Share of the modal mass carried by x displacements.
inline double longitudinal_fraction(const GlobalSystem& sys, const Vec& phi) {
  Vec px = Vec::Zero(phi.size());
  const auto& free = sys.dofs.u_free();
  for (std::size_t i = 0; i < free.size(); ++i)
    if (free[i] % 2 == 0) px(Eigen::Index(i)) = phi(Eigen::Index(i));
  return px.dot(sys.Muu * px) / phi.dot(sys.Muu * phi);
}

/// Index of the mode with the largest longitudinal fraction.
inline std::size_t longitudinal_mode(const GlobalSystem& sys, const std::vector<Mode>& modes) {
  if (modes.empty()) throw InputError("no modes to search");
  std::size_t best = 0;
  double best_f = -1.0;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double f = longitudinal_fraction(sys, modes[i].phi);
    if (f > best_f) {
      best_f = f;
      best = i;
    }
  }
  return best;
}

// ----------------------------------------------------------------------------
// Reference relations
// ----------------------------------------------------------------------------

/// Transverse wave dispersion omega = c2 k sqrt(1 + k^2 l^2), c2 = sqrt(mu / rho).
inline double dispersion_relation(const Material& m, double k) {
  if (!(k >= 0.0)) throw InputError("wavenumber must be non-negative");
  const double c2 = std::sqrt(m.mu / m.rho);
  return c2 * k * std::sqrt(1.0 + k * k * m.l * m.l);
}

/// Scalar trajectory of q^{n+1} = (2 q^n - q^{n-1} + dt^2 f) / (1 + dt^2 omega^2), n = 0..steps-1.
inline std::vector<double> modal_recurrence(double q0, double q_prev, double omega, double dt, std::size_t steps,
                                            double modal_load = 0.0) {
  std::vector<double> q{q0};
  double a = q_prev, b = q0;
  const double den = 1.0 + dt * dt * omega * omega;
  for (std::size_t n = 0; n < steps; ++n) {
    const double c = (2.0 * b - a + dt * dt * modal_load) / den;
    q.push_back(c);
    a = b;
    b = c;
  }
  return q;
}

/// Period from linearly interpolated zero crossings: twice the mean spacing.
inline double zero_crossing_period(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size()) throw InputError("time and value series differ in length");
  std::vector<double> crossings;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    if (y[i] == 0.0) {
      crossings.push_back(t[i]);
    } else if (y[i] * y[i + 1] < 0.0) {
      crossings.push_back(t[i] + (t[i + 1] - t[i]) * y[i] / (y[i] - y[i + 1]));
    }
  }
  if (crossings.size() < 3) throw SolverError("fewer than three zero crossings; run longer");
  return 2.0 * (crossings.back() - crossings.front()) / double(crossings.size() - 1);
}

}  // namespace ccst
