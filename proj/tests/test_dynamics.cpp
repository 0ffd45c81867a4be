#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "ccst/dynamics.hpp"
#include "ccst/statics.hpp"

using namespace ccst;

namespace {

std::vector<BoundaryTag> cantilever() { return {BoundaryTag::clamped(Side::left)}; }

GlobalSystem beam(double eta, std::size_t nx = 8, std::size_t ny = 2, std::vector<BoundaryTag> tags = cantilever()) {
  return assemble(build_rect_mesh(4, 1, nx, ny), derive(1, 0.29, 1, eta), tags);
}

GlobalSystem loaded_beam(double eta) {
  BoundaryTag load;
  load.side = Side::right;
  load.traction = {0.1, -0.5};
  load.couple_traction = 0.05;
  return beam(eta, 8, 2, {BoundaryTag::clamped(Side::left), load});
}

double rel(const Vec& a, const Vec& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST(Condense, NoLoadsGiveZeroConstants) {
  const GlobalSystem sys = beam(0.1);
  const auto ops = condense(sys, 0.1);
  EXPECT_EQ(ops.c1().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(ops.c4().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Condense, NoCoupleTractionLeavesForceUntouched) {
  BoundaryTag load;
  load.side = Side::right;
  load.traction = {0.0, 1.0};
  const GlobalSystem sys = beam(0.1, 8, 2, {BoundaryTag::clamped(Side::left), load});
  const auto ops = condense(sys, 0.1);
  EXPECT_EQ(ops.c1().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((ops.c4() - sys.Fu).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Condense, SingleElementMultiplierBlock) {
  const GlobalSystem sys = assemble(build_rect_mesh(1, 1, 1, 1), derive(1, 0.29, 1, 0.1), cantilever());
  const auto ops = condense(sys, 0.1);
  ASSERT_EQ(ops.c2().rows(), 1);
  EXPECT_GT(ops.c2()(0, 0), 0.0);
}

TEST(Condense, MatchesDefinitions) {
  const GlobalSystem sys = loaded_beam(0.1);
  const auto ops = condense(sys, 0.2);
  const Eigen::MatrixXd Ktt(sys.Ktt), Kts(sys.Kts), Kst(sys.Kst), Kus(sys.Kus), Ksu(sys.Ksu), Kuu(sys.Kuu);
  const Eigen::MatrixXd C2 = Kst * Ktt.llt().solve(Kts);
  const Vec C1 = Kst * Ktt.llt().solve(sys.mt) + sys.rs;
  const Eigen::MatrixXd C3 = Kuu + Kus * C2.lu().solve(Ksu);
  const Vec C4 = sys.Fu + Kus * C2.lu().solve(C1);
  EXPECT_LT((ops.c2() - C2).norm(), 1e-12 * C2.norm());
  EXPECT_LT((ops.c3() - C3).norm(), 1e-12 * C3.norm());
  EXPECT_LT(rel(ops.c1(), C1), 1e-12);
  EXPECT_LT(rel(ops.c4(), C4), 1e-12);
}

TEST(Condense, OperatorProperties) {
  const GlobalSystem sys = loaded_beam(0.1);
  const auto ops = condense(sys, 0.3);
  const auto& C2 = ops.c2();
  const auto& C3 = ops.c3();
  EXPECT_EQ((C2 - C2.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((C3 - C3.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(C2).eigenvalues().minCoeff(), 0.0);
  const Eigen::MatrixXd A = Eigen::MatrixXd(sys.Muu) + 0.09 * C3;
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues().minCoeff(), 0.0);
}

TEST(Condense, ComposedPathMatchesDense) {
  const GlobalSystem sys = loaded_beam(0.1);
  CondenseOptions sparse;
  sparse.dense_limit = 0;
  const auto a = condense(sys, 0.2), b = condense(sys, 0.2, sparse);
  ASSERT_TRUE(a.dense());
  ASSERT_FALSE(b.dense());
  const Vec x = Vec::LinSpaced(a.size(), -1, 1);
  EXPECT_LT(rel(b.apply_c3(x), a.apply_c3(x)), 1e-10);
  EXPECT_LT(rel(b.c4(), a.c4()), 1e-10);
  EXPECT_LT(rel(b.solve_march(x), a.solve_march(x)), 1e-9);
  EXPECT_THROW((void)b.c3(), SolverError);
}

TEST(Condense, RejectsBadInput) {
  EXPECT_THROW(condense(beam(0.1), 0.0), InputError);
  EXPECT_THROW(condense(beam(0.1), -1.0), InputError);
  EXPECT_THROW(condense(beam(0.0), 0.1), InputError);
}

TEST(Condense, DetectsCheckerboardMultiplier) {
  std::vector<BoundaryTag> all;
  for (Side s : kAllSides) all.push_back(BoundaryTag::clamped(s));
  const GlobalSystem sys = assemble(build_rect_mesh(1, 1, 4, 4), derive(1, 0.29, 1, 0.1), all);
  try {
    (void)condense(sys, 0.1);
    FAIL() << "expected a singular C2";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("checkerboard"), std::string::npos);
  }
}

TEST(Step, StaticEquilibriumIsAFixedPoint) {
  const GlobalSystem sys = loaded_beam(0.1);
  for (double dt : {0.01, 0.5, 10.0}) {
    const auto ops = condense(sys, dt);
    const auto ldlt = ops.c3().ldlt();
    Vec u = ldlt.solve(ops.c4());
    u += ldlt.solve(ops.c4() - ops.c3() * u);  // one refinement pass
    MarchState s{u, u, 0, 0.0};
    for (int n = 0; n < 5; ++n) s = step(ops, s);
    EXPECT_LT(rel(s.u_curr, u), 1e-12) << "dt=" << dt;
  }
}

TEST(Step, ZeroStateStaysZero) {
  const GlobalSystem sys = beam(0.1);
  const auto ops = condense(sys, 0.1);
  const Vec z = Vec::Zero(ops.size());
  MarchState s = bootstrap(ops, z, z);
  for (int n = 0; n < 20; ++n) s = step(ops, s);
  EXPECT_EQ(s.u_curr.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.step, 20u);
  EXPECT_DOUBLE_EQ(s.t, 2.0);
}

TEST(Bootstrap, Examples) {
  const GlobalSystem sys = loaded_beam(0.1);
  const auto ops = condense(sys, 0.05);
  const Vec ustar = ops.c3().ldlt().solve(ops.c4());
  const Vec z = Vec::Zero(ops.size());
  EXPECT_LT(rel(bootstrap(ops, ustar, z).u_prev, ustar), 1e-12);

  const GlobalSystem free_sys = beam(0.1);
  const auto fops = condense(free_sys, 0.05);
  const auto modes = eigenmodes(fops, 3);
  const Vec& phi = modes[1].phi;
  const double w = modes[1].omega, dt = 0.05;
  EXPECT_LT(rel(bootstrap(fops, phi, Vec::Zero(phi.size())).u_prev, phi * (1 - 0.5 * dt * dt * w * w)), 1e-8);

  const Vec v0 = Vec::Constant(fops.size(), 0.7);
  EXPECT_LT(rel(bootstrap(fops, Vec::Zero(v0.size()), v0).u_prev, -dt * v0), 1e-15);
  EXPECT_LT(rel(bootstrap(fops, phi, Vec::Zero(phi.size()), StartRule::first_order).u_prev, phi), 1e-15);
  EXPECT_THROW(bootstrap(fops, Vec::Zero(3), Vec::Zero(3)), InputError);
}

TEST(Step, ModalProjectionFollowsScalarRecurrence) {
  const GlobalSystem sys = beam(0.1);
  const double dt = 0.3;
  const auto ops = condense(sys, dt);
  const auto modes = eigenmodes(ops, 4);
  for (std::size_t k : {0u, 3u}) {
    const Vec& phi = modes[k].phi;
    const double w = modes[k].omega;
    MarchState s = bootstrap(ops, phi, Vec::Zero(phi.size()));
    const auto q = modal_recurrence(1.0, 1.0 - 0.5 * dt * dt * w * w, w, dt, 100);
    double worst = 0;
    for (std::size_t n = 1; n <= 100; ++n) {
      s = step(ops, s);
      const double proj = phi.dot(ops.apply_mass(s.u_curr));
      worst = std::max(worst, std::abs(proj - q[n]));
    }
    EXPECT_LT(worst, 1e-8) << "mode " << k;
  }
}

TEST(Step, ModalRecurrenceWithLoad) {
  const auto q = modal_recurrence(0.0, 0.0, 2.0, 0.1, 2000, 4.0);
  EXPECT_NEAR(q.back(), 1.0, 1e-6);  // settles at f / omega^2
  EXPECT_EQ(q.size(), 2001u);
}

TEST(Eigen, LanczosMatchesDenseSolver) {
  const GlobalSystem sys = beam(0.1, 6, 2);
  const auto ops = condense(sys, 1.0);
  const auto modes = eigenmodes(ops, 8);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(ops.c3(), Eigen::MatrixXd(sys.Muu));
  for (std::size_t k = 0; k < modes.size(); ++k) {
    EXPECT_NEAR(modes[k].omega, std::sqrt(ges.eigenvalues()(Eigen::Index(k))), 1e-9 * modes[k].omega);
    EXPECT_GT(modes[k].omega, 0.0);
    EXPECT_NEAR(modes[k].phi.dot(sys.Muu * modes[k].phi), 1.0, 1e-12);
    const Vec r = ops.apply_c3(modes[k].phi) - modes[k].omega * modes[k].omega * ops.apply_mass(modes[k].phi);
    EXPECT_LT(r.norm(), 1e-7 * modes[k].omega * modes[k].omega);
  }
  for (std::size_t k = 1; k < modes.size(); ++k) EXPECT_GE(modes[k].omega, modes[k - 1].omega);
}

TEST(Eigen, ComposedPathMatchesDense) {
  const GlobalSystem sys = beam(0.1, 6, 2);
  CondenseOptions sparse;
  sparse.dense_limit = 0;
  const auto a = eigenmodes(condense(sys, 1.0), 5), b = eigenmodes(condense(sys, 1.0, sparse), 5);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(a[k].omega, b[k].omega, 1e-9 * a[k].omega);
}

TEST(Eigen, CouplesStiffenBendingOnly) {
  const Mesh mesh = build_rect_mesh(10, 1, 24, 2);
  const Material m = derive(1, 0.29, 1, 0.1);
  const GlobalSystem sys = assemble(mesh, m, cantilever());
  const auto ccst = eigenmodes(condense(sys, 0.5), 6);
  const auto twin = classical_twin(mesh, m, cantilever(), 0.5);
  const auto classical = eigenmodes(twin.ops, 6);
  EXPECT_GT(ccst[0].omega, classical[0].omega);
  const auto lc = longitudinal_mode(sys, ccst), lk = longitudinal_mode(twin.system, classical);
  EXPECT_NEAR(ccst[lc].omega / classical[lk].omega, 1.0, 0.005);
  EXPECT_GT(longitudinal_fraction(sys, ccst[lc].phi), 0.9);
}

TEST(Eigen, ClassicalTwinIgnoresEta) {
  const Mesh mesh = build_rect_mesh(4, 1, 6, 2);
  const auto a = eigenmodes(classical_twin(mesh, derive(1, 0.29, 1, 0.0), cantilever(), 1.0).ops, 4);
  const auto b = eigenmodes(classical_twin(mesh, derive(1, 0.29, 1, 0.5), cantilever(), 1.0).ops, 4);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(a[k].omega, b[k].omega);
}

TEST(Eigen, DeterministicSigns) {
  const auto a = eigenmodes(condense(beam(0.1), 1.0), 3), b = eigenmodes(condense(beam(0.1), 1.0), 3);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(a[k].phi, b[k].phi);
}

TEST(Recover, ZeroDisplacementWithoutCouples) {
  const GlobalSystem sys = beam(0.1);
  const auto ops = condense(sys, 0.1);
  const auto r = recover_fields(ops, sys, Vec::Zero(ops.size()));
  EXPECT_EQ(r.theta.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.s.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Recover, MatchesFusedStaticSolve) {
  const GlobalSystem sys = loaded_beam(0.1);
  const StaticSolution sol = solve_static(sys);
  for (double limit : {20000.0, 0.0}) {
    CondenseOptions opt;
    opt.dense_limit = Eigen::Index(limit);
    const auto ops = condense(sys, 0.1, opt);
    const auto r = recover_fields(ops, sys, sol.u);
    EXPECT_LT(rel(r.theta, sol.theta), 1e-9);
    EXPECT_LT(rel(r.s, sol.s), 1e-9);
    EXPECT_LT(rel(ops.c3_solver()(ops.c4()), sol.u), 1e-9);
  }
}

TEST(Recover, UniformExtensionHasNoRotation) {
  const GlobalSystem sys = beam(0.1);
  const auto ops = condense(sys, 0.1);
  Vec full = Vec::Zero(Eigen::Index(sys.dofs.n_u_all()));
  for (std::size_t n = 0; n < sys.mesh.num_nodes(); ++n) full(Eigen::Index(2 * n)) = 1e-3 * sys.mesh.node(n).x();
  const auto r = recover_fields(ops, sys, sys.dofs.restrict_u(full));
  EXPECT_LT(r.theta.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(r.s.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ClassicalTwin, MarchMatchesDisplacementOnlyScheme) {
  const Mesh mesh = build_rect_mesh(2, 1, 2, 2);
  const double dt = 0.25;
  const auto twin = classical_twin(mesh, derive(1, 0.29, 1, 0.0), cantilever(), dt);
  const Eigen::MatrixXd M(twin.system.Muu), K(twin.system.Kuu);
  const Vec u0 = Vec::LinSpaced(twin.ops.size(), 0.0, 0.01);
  MarchState s = bootstrap(twin.ops, u0, Vec::Zero(u0.size()), StartRule::first_order);
  Vec a = u0, b = u0;
  const auto A = (M + dt * dt * K).ldlt();
  for (int n = 0; n < 50; ++n) {
    s = step(twin.ops, s);
    const Vec c = A.solve(M * (2 * b - a));
    a = b;
    b = c;
  }
  EXPECT_LT(rel(s.u_curr, b), 1e-8);
}

TEST(Energy, ZeroState) {
  const GlobalSystem sys = beam(0.1);
  const auto ops = condense(sys, 0.1);
  const auto e = energy(ops, sys, bootstrap(ops, Vec::Zero(ops.size()), Vec::Zero(ops.size())));
  EXPECT_EQ(e.total, 0.0);
}

TEST(Energy, ClassicalHasNoCurvature) {
  const auto twin = classical_twin(build_rect_mesh(4, 1, 8, 2), derive(1, 0.29, 1, 0.1), cantilever(), 0.1);
  const auto modes = eigenmodes(twin.ops, 1);
  const auto e = energy(twin.ops, twin.system, bootstrap(twin.ops, modes[0].phi, Vec::Zero(modes[0].phi.size())));
  EXPECT_EQ(e.curvature, 0.0);
  EXPECT_GT(e.strain, 0.0);
}

TEST(Energy, PotentialEqualsCondensedQuadraticForm) {
  const GlobalSystem sys = beam(0.1);
  const auto ops = condense(sys, 0.1);
  const Vec u = eigenmodes(ops, 2)[1].phi;
  const auto e = energy(ops, sys, MarchState{u, u, 0, 0});
  EXPECT_NEAR(e.strain + e.curvature, 0.5 * u.dot(ops.apply_c3(u)), 1e-12 * e.total);
  EXPECT_GT(e.curvature, 0.0);
}

TEST(Energy, NonIncreasingAlongEigenstateRun) {
  const GlobalSystem sys = beam(0.1);
  const auto ops = condense(sys, 0.5);
  const auto modes = eigenmodes(ops, 1);
  MarchState s = bootstrap(ops, modes[0].phi, Vec::Zero(ops.size()));
  double prev = energy(ops, sys, s).total;
  const double e0 = prev;
  for (int n = 0; n < 200; ++n) {
    s = step(ops, s);
    const double e = energy(ops, sys, s).total;
    EXPECT_LE(e, prev * (1 + 1e-12));
    EXPECT_LE(e, e0);
    prev = e;
  }
  EXPECT_LT(prev, e0);
}

TEST(Dispersion, Relation) {
  const Material classical = derive(1, 0.29, 1, 0);
  const double c2 = std::sqrt(1 / 2.58);
  EXPECT_NEAR(c2, 0.62257, 1e-5);
  for (double k : {0.0, 0.5, 3.0, 40.0}) EXPECT_DOUBLE_EQ(dispersion_relation(classical, k), c2 * k);
  EXPECT_EQ(dispersion_relation(derive(1, 0.29, 1, 0.1), 0.0), 0.0);
  EXPECT_THROW(dispersion_relation(classical, -1.0), InputError);
  const Material m = derive(1, 0.29, 1, 0.001);
  double prev_w = 0, prev_slope = 0;
  for (int i = 1; i <= 200; ++i) {
    const double k = 0.5 * i, w = dispersion_relation(m, k), slope = (w - prev_w) / 0.5;
    EXPECT_GT(w, prev_w);
    if (i > 1) EXPECT_GT(slope, prev_slope);
    prev_w = w;
    prev_slope = slope;
  }
}

TEST(ZeroCrossing, CosinePeriod) {
  std::vector<double> t, y;
  for (int n = 0; n <= 1000; ++n) {
    t.push_back(0.01 * n);
    y.push_back(std::cos(2 * std::numbers::pi * t.back() / 1.7));
  }
  EXPECT_NEAR(zero_crossing_period(t, y), 1.7, 1e-4);
  EXPECT_THROW(zero_crossing_period({0, 1}, {1, 1}), SolverError);
}
