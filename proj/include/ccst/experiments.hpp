#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ccst/assembly.hpp"
#include "ccst/config.hpp"
#include "ccst/dynamics.hpp"
#include "ccst/fields.hpp"
#include "ccst/io.hpp"
#include "ccst/parallel.hpp"
#include "ccst/statics.hpp"

namespace ccst {

// ----------------------------------------------------------------------------
// Shared pieces
// ----------------------------------------------------------------------------

struct Probe {
  std::size_t id = 0;
  std::size_t node = 0;
  Eigen::Vector2d at = Eigen::Vector2d::Zero();  ///< node coordinates (nearest node to the request)
};

inline std::vector<Probe> make_probes(const Mesh& mesh, const std::vector<Eigen::Vector2d>& points) {
  std::vector<Probe> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    Probe p;
    p.id = i;
    p.node = mesh.nearest_node(points[i]);
    p.at = mesh.node(p.node);
    out.push_back(p);
  }
  return out;
}

struct ProbeSample {
  std::size_t step = 0;
  double t = 0;
  std::size_t probe = 0;
  double x = 0, y = 0, ux = 0, uy = 0, theta = 0;
  Energy energy;
};

struct FullFields {
  Vec u, theta, s;  ///< full u and theta vectors, s per element
};

inline FullFields full_fields(const GlobalSystem& sys, const CondensedOperators& ops, const Vec& u) {
  const RecoveredFields r = recover_fields(ops, sys, u);
  return {sys.dofs.expand_u(u), sys.dofs.expand_theta(r.theta), r.s};
}

struct Trajectory {
  std::vector<double> t;                ///< steps 0..N
  std::vector<Energy> energy;           ///< steps 0..N
  std::vector<double> max_abs_u;        ///< steps 0..N
  std::vector<ProbeSample> samples;     ///< steps 1..N, probes in order within a step
};

using StepHook = std::function<void(const MarchState&, const FullFields&)>;

/// Marches `steps` steps from `s`, recording energy, peak displacement and probe samples.
/// The hook (if any) sees step 0 and every later step.
inline Trajectory run_trajectory(const GlobalSystem& sys, const CondensedOperators& ops, MarchState s,
                                 std::size_t steps, const std::vector<Probe>& probes, const StepHook& hook = {}) {
  Trajectory tr;
  tr.t.reserve(steps + 1);
  tr.energy.reserve(steps + 1);
  tr.samples.reserve(steps * probes.size());
  for (std::size_t n = 0;; ++n) {
    const Energy e = energy(ops, sys, s);
    tr.t.push_back(s.t);
    tr.energy.push_back(e);
    tr.max_abs_u.push_back(s.u_curr.size() ? s.u_curr.cwiseAbs().maxCoeff() : 0.0);
    if (n > 0 || hook) {
      const FullFields f = full_fields(sys, ops, s.u_curr);
      if (n > 0)
        for (const auto& p : probes) {
          ProbeSample ps;
          ps.step = s.step;
          ps.t = s.t;
          ps.probe = p.id;
          ps.x = p.at.x();
          ps.y = p.at.y();
          ps.ux = f.u(Eigen::Index(2 * p.node));
          ps.uy = f.u(Eigen::Index(2 * p.node + 1));
          ps.theta = rotation_at(sys.mesh, f.theta, p.at);
          ps.energy = e;
          tr.samples.push_back(ps);
        }
      if (hook) hook(s, f);
    }
    if (n == steps) break;
    s = step(ops, s);
  }
  return tr;
}

inline void write_timeseries(const std::filesystem::path& path, const std::vector<ProbeSample>& samples) {
  CsvWriter csv(path, {"step", "t", "probe_id", "x", "y", "ux", "uy", "theta", "energy_kinetic", "energy_strain",
                       "energy_curvature", "energy_total"});
  for (const auto& s : samples)
    csv.write(s.step, s.t, s.probe, s.x, s.y, s.ux, s.uy, s.theta, s.energy.kinetic, s.energy.strain,
              s.energy.curvature, s.energy.total);
}

/// Model pair built from one config: C-CST with the configured eta, and its eta = 0 twin.
struct Model {
  std::string name;
  GlobalSystem sys;
  CondensedOperators ops;
};

inline Model ccst_model(const ExperimentConfig& c, double dt) {
  const Mesh mesh = build_rect_mesh(c.width, c.height, c.nx, c.ny);
  GlobalSystem sys = assemble(mesh, c.material(), c.tags());
  CondensedOperators ops = condense(sys, dt);
  return {"ccst", std::move(sys), std::move(ops)};
}

inline Model classical_model(const ExperimentConfig& c, double dt) {
  const Mesh mesh = build_rect_mesh(c.width, c.height, c.nx, c.ny);
  auto twin = classical_twin(mesh, c.material(), c.tags(), dt);
  return {"classical", std::move(twin.system), std::move(twin.ops)};
}

inline std::vector<Model> model_pair(const ExperimentConfig& c, double dt, std::size_t threads) {
  return parallel_map(
      2, [&](std::size_t i) { return i == 0 ? ccst_model(c, dt) : classical_model(c, dt); }, threads);
}

inline std::string vtk_name(const std::string& model, std::size_t step) {
  std::ostringstream s;
  s << model << "_" << std::setw(6) << std::setfill('0') << step << ".vtk";
  return s.str();
}

/// VTK hook writing step 0, every `stride`-th step and the last step.
inline StepHook vtk_hook(const ExperimentConfig& c, const GlobalSystem& sys, const std::filesystem::path& dir,
                         const std::string& model, std::size_t last_step) {
  if (!c.vtk) return {};
  return [&c, &sys, dir, model, last_step](const MarchState& s, const FullFields& f) {
    const bool due = s.step == 0 || s.step == last_step || (c.vtk_stride > 0 && s.step % c.vtk_stride == 0);
    if (due) write_vtk(dir / "vtk" / vtk_name(model, s.step), sys.mesh, f.u, f.theta, f.s, s.t);
  };
}

/// Mode scaled so that its largest displacement component equals `amplitude`.
inline Vec scaled_mode(const Mode& m, double amplitude) {
  return amplitude * m.phi / m.phi.cwiseAbs().maxCoeff();
}

// ----------------------------------------------------------------------------
// cantilever-rigidity
// ----------------------------------------------------------------------------

struct RigidityResult {
  CantileverSetup setup;
  double classical_stiffness = 0;
  std::vector<CantileverResult> rows;
};

inline CantileverSetup cantilever_setup(const ExperimentConfig& c) {
  CantileverSetup s;
  s.E = c.E;
  s.nu = c.nu;
  s.rho = c.rho;
  s.height = c.height;
  s.length = c.width;
  s.nx = c.nx;
  s.ny = c.ny;
  s.load = c.load;
  return s;
}

inline RigidityResult cantilever_rigidity(const ExperimentConfig& c, std::size_t threads = 1) {
  RigidityResult r;
  r.setup = cantilever_setup(c);
  r.classical_stiffness = classical_tip_stiffness(r.setup);
  const double mu = derive(c.E, c.nu, c.rho, 0.0).mu;
  r.rows = parallel_map(
      c.h_over_l.size(),
      [&](std::size_t i) {
        const double l = r.setup.height / c.h_over_l[i];
        return cantilever_stiffness(r.setup, mu * l * l);
      },
      threads);
  return r;
}

inline std::vector<std::string> write_rigidity(const RigidityResult& r, const ExperimentConfig& c,
                                               const std::filesystem::path& out) {
  CsvWriter csv(out / "rigidity.csv",
                {"h_over_l", "eta", "l", "stiffness", "stiffness_classical", "ratio", "reaction_y"});
  for (const auto& row : r.rows)
    csv.write(row.h_over_l, row.eta, row.l, row.stiffness, row.classical_stiffness, row.ratio, row.reaction_y);
  if (c.svg) {
    PlotSeries s{"K / K_classical", {}, {}, true};
    for (const auto& row : r.rows) {
      s.x.push_back(row.h_over_l);
      s.y.push_back(row.ratio);
    }
    write_svg_plot(out / "rigidity.svg", {"Cantilever tip stiffness", "h / l", "K / K_classical", true, true}, {s});
  }
  if (c.vtk) {
    const Mesh mesh = build_rect_mesh(r.setup.length, r.setup.height, r.setup.nx, r.setup.ny);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      const auto& sol = r.rows[i].solution;
      write_vtk(out / "vtk" / ("cantilever_" + std::to_string(i) + ".vtk"), mesh, sol.u_full, sol.theta_full, sol.s);
    }
  }
  std::vector<std::string> lines;
  std::ostringstream s;
  s << "classical stiffness 3EI/L^3 = " << r.classical_stiffness;
  lines.push_back(s.str());
  for (const auto& row : r.rows) {
    std::ostringstream l;
    l << "h/l = " << row.h_over_l << "  K = " << row.stiffness << "  K/K_classical = " << row.ratio;
    lines.push_back(l.str());
  }
  return lines;
}

// ----------------------------------------------------------------------------
// mms-static
// ----------------------------------------------------------------------------

struct MmsResult {
  std::vector<MmsRow> rows;
  std::vector<MmsRow> linear_region;
  double slope = 0;
  bool monotone = false;
};

inline MmsResult mms_convergence(const ExperimentConfig& c, std::size_t threads = 1) {
  MmsResult r;
  r.rows = mms_static(c.mesh_sizes, c.material(), threads);
  std::sort(r.rows.begin(), r.rows.end(), [](const MmsRow& a, const MmsRow& b) { return a.per_side < b.per_side; });
  r.monotone = true;
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    if (!(r.rows[i].l2_error < r.rows[i - 1].l2_error)) r.monotone = false;
  r.linear_region = mms_linear_region(r.rows);
  r.slope = r.linear_region.size() >= 2 ? mms_convergence_slope(r.rows) : std::nan("");
  return r;
}

inline std::vector<std::string> write_mms(const MmsResult& r, const ExperimentConfig& c,
                                          const std::filesystem::path& out) {
  CsvWriter csv(out / "mms_convergence.csv",
                {"per_side", "elements", "mesh_size", "l2_error", "l2_relative", "linear_region"});
  for (const auto& row : r.rows) {
    const bool lin = std::any_of(r.linear_region.begin(), r.linear_region.end(),
                                 [&](const MmsRow& x) { return x.per_side == row.per_side; });
    csv.write(row.per_side, row.elements, row.mesh_size, row.l2_error, row.l2_relative, lin ? 1 : 0);
  }
  CsvWriter summary(out / "mms_summary.csv", {"slope", "fit_points", "monotone"});
  summary.write(r.slope, r.linear_region.size(), r.monotone ? 1 : 0);
  if (c.svg) {
    PlotSeries s{"L2 error", {}, {}, true};
    for (const auto& row : r.rows) {
      s.x.push_back(double(row.per_side));
      s.y.push_back(row.l2_error);
    }
    write_svg_plot(out / "mms_convergence.svg",
                   {"Manufactured solution convergence", "elements per side", "L2 error", true, true}, {s});
  }
  std::ostringstream l;
  l << "slope (linear region, " << r.linear_region.size() << " meshes) = " << r.slope
    << (r.monotone ? ", error decreases monotonically" : ", error NOT monotone");
  return {l.str()};
}

// ----------------------------------------------------------------------------
// eigen-evolve
// ----------------------------------------------------------------------------

struct EigenRun {
  std::string model;
  std::vector<Mode> modes;
  std::vector<double> longitudinal;  ///< ux share of modal mass per mode
  std::size_t mode_index = 0;        ///< 0-based index of the marched mode
  Trajectory trajectory;
};

inline std::vector<double> longitudinal_fractions(const GlobalSystem& sys, const std::vector<Mode>& modes) {
  std::vector<double> out;
  for (const auto& m : modes) out.push_back(longitudinal_fraction(sys, m.phi));
  return out;
}

/// Marches mode `mode_index` of a model for the configured steps.
inline EigenRun evolve_mode(const Model& model, const ExperimentConfig& c, std::size_t mode_index,
                            const std::filesystem::path& out = {}) {
  EigenRun run;
  run.model = model.name;
  run.modes = eigenmodes(model.ops, c.mode_count);
  if (mode_index >= run.modes.size())
    throw InputError("modes.mode = " + std::to_string(mode_index + 1) + " exceeds the " +
                     std::to_string(run.modes.size()) + " computed modes");
  run.longitudinal = longitudinal_fractions(model.sys, run.modes);
  run.mode_index = mode_index;
  const Vec u0 = scaled_mode(run.modes[mode_index], c.amplitude);
  const MarchState s0 = bootstrap(model.ops, u0, Vec::Zero(u0.size()), c.start);
  const auto probes = make_probes(model.sys.mesh, c.probes);
  run.trajectory = run_trajectory(model.sys, model.ops, s0, c.steps, probes,
                                  out.empty() ? StepHook{} : vtk_hook(c, model.sys, out, model.name, c.steps));
  return run;
}

struct EigenEvolveResult {
  EigenRun ccst, classical;
};

inline EigenEvolveResult eigen_evolve(const ExperimentConfig& c, std::size_t threads = 1,
                                      const std::filesystem::path& out = {}) {
  const auto models = model_pair(c, c.dt, threads);
  auto runs = parallel_map(
      2, [&](std::size_t i) { return evolve_mode(models[i], c, c.mode - 1, out); }, threads);
  return {std::move(runs[0]), std::move(runs[1])};
}

inline void write_modes(const std::filesystem::path& path, const std::vector<const EigenRun*>& runs) {
  CsvWriter csv(path, {"model", "index0", "index1", "omega", "period", "longitudinal_fraction"});
  for (const auto* r : runs)
    for (std::size_t i = 0; i < r->modes.size(); ++i)
      csv.write(r->model, i, i + 1, r->modes[i].omega, 2.0 * std::numbers::pi / r->modes[i].omega,
                r->longitudinal[i]);
}

inline std::vector<std::string> write_eigen_evolve(const EigenEvolveResult& r, const ExperimentConfig& c,
                                                   const std::filesystem::path& out) {
  write_modes(out / "modes.csv", {&r.ccst, &r.classical});
  write_timeseries(out / "timeseries_ccst.csv", r.ccst.trajectory.samples);
  write_timeseries(out / "timeseries_classical.csv", r.classical.trajectory.samples);
  if (c.svg && !c.probes.empty()) {
    std::vector<PlotSeries> series;
    for (const auto* run : {&r.ccst, &r.classical}) {
      const std::size_t np = c.probes.size(), last = np - 1;
      PlotSeries s{run->model + " probe " + std::to_string(last), {}, {}, false};
      for (std::size_t k = last; k < run->trajectory.samples.size(); k += np) {
        s.x.push_back(run->trajectory.samples[k].t);
        s.y.push_back(run->trajectory.samples[k].uy);
      }
      series.push_back(std::move(s));
    }
    write_svg_plot(out / "eigen_evolve.svg", {"Eigenstate evolution", "t", "uy", false, false}, series);
  }
  std::vector<std::string> lines;
  for (const auto* run : {&r.ccst, &r.classical}) {
    const auto& e = run->trajectory.energy;
    std::ostringstream l;
    l << run->model << ": mode " << run->mode_index + 1 << " (0-based " << run->mode_index
      << ") omega = " << run->modes[run->mode_index].omega << ", E(t_f)/E(0) = " << e.back().total / e.front().total;
    lines.push_back(l.str());
  }
  return lines;
}

// ----------------------------------------------------------------------------
// energy-drift
// ----------------------------------------------------------------------------

struct DriftRun {
  std::string model;
  double dt = 0;
  std::size_t mode_index = 0;
  double omega = 0;
  std::vector<double> t, ratio;
  std::vector<Energy> energy;
  [[nodiscard]] double final_ratio() const { return ratio.back(); }
  [[nodiscard]] double max_ratio() const { return *std::max_element(ratio.begin(), ratio.end()); }
  [[nodiscard]] double drift() const { return 1.0 - ratio.back(); }
};

struct EnergyDriftResult {
  std::vector<DriftRun> runs;  ///< ccst runs for every dt, then classical runs
  [[nodiscard]] const DriftRun& find(const std::string& model, double dt) const {
    for (const auto& r : runs)
      if (r.model == model && r.dt == dt) return r;
    throw InputError("no " + model + " run with dt = " + std::to_string(dt));
  }
};

inline std::size_t steps_for(double t_final, double dt) {
  const double n = t_final / dt, rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n))
    throw InputError("sweep.dt entry " + std::to_string(dt) + " does not divide t_final = " + std::to_string(t_final));
  return std::size_t(rounded);
}

inline EnergyDriftResult energy_drift(const ExperimentConfig& c, std::size_t threads = 1) {
  const double t_final = c.t_final();
  const std::size_t nd = c.dt_list.size();
  for (double dt : c.dt_list) (void)steps_for(t_final, dt);
  // Modes do not depend on dt: solve once per model.
  const auto base = model_pair(c, c.dt_list.front(), threads);
  const auto modes = parallel_map(2, [&](std::size_t i) { return eigenmodes(base[i].ops, c.mode_count); }, threads);
  for (const auto& m : modes)
    if (c.mode > m.size()) throw InputError("modes.mode exceeds the computed mode count");

  EnergyDriftResult r;
  r.runs = parallel_map(
      2 * nd,
      [&](std::size_t k) {
        const std::size_t which = k / nd;
        const double dt = c.dt_list[k % nd];
        const Model& b = base[which];
        const CondensedOperators ops = which == 0 ? condense(b.sys, dt) : classical_operators(b.sys, dt);
        DriftRun run;
        run.model = b.name;
        run.dt = dt;
        run.mode_index = c.mode - 1;
        run.omega = modes[which][run.mode_index].omega;
        const Vec u0 = scaled_mode(modes[which][run.mode_index], c.amplitude);
        MarchState s = bootstrap(ops, u0, Vec::Zero(u0.size()), c.start);
        const std::size_t steps = steps_for(t_final, dt);
        const Trajectory tr = run_trajectory(b.sys, ops, s, steps, {});
        run.t = tr.t;
        run.energy = tr.energy;
        const double e0 = tr.energy.front().total;
        for (const auto& e : tr.energy) run.ratio.push_back(e.total / e0);
        return run;
      },
      threads);
  return r;
}

inline std::vector<std::string> write_energy_drift(const EnergyDriftResult& r, const ExperimentConfig& c,
                                                   const std::filesystem::path& out) {
  CsvWriter csv(out / "energy_drift.csv", {"model", "dt", "step", "t", "energy_kinetic", "energy_strain",
                                           "energy_curvature", "energy_total", "energy_ratio"});
  for (const auto& run : r.runs)
    for (std::size_t n = 0; n < run.t.size(); ++n)
      csv.write(run.model, run.dt, n, run.t[n], run.energy[n].kinetic, run.energy[n].strain, run.energy[n].curvature,
                run.energy[n].total, run.ratio[n]);

  CsvWriter summary(out / "energy_summary.csv",
                    {"model", "dt", "mode_index0", "mode_index1", "omega", "final_ratio", "max_ratio", "drift",
                     "drift_over_classical"});
  std::vector<std::string> lines;
  for (const auto& run : r.runs) {
    const double ref = r.find("classical", run.dt).drift();
    const double rel = ref > 0 ? run.drift() / ref : std::nan("");
    summary.write(run.model, run.dt, run.mode_index, run.mode_index + 1, run.omega, run.final_ratio(),
                  run.max_ratio(), run.drift(), rel);
    std::ostringstream l;
    l << run.model << " dt = " << run.dt << ": E(t_f)/E(0) = " << run.final_ratio() << ", drift = " << run.drift();
    if (run.model == "ccst") l << " (" << rel << "x classical)";
    lines.push_back(l.str());
  }
  if (c.svg) {
    std::vector<PlotSeries> series;
    for (const auto& run : r.runs) {
      std::ostringstream name;
      name << run.model << " dt=" << run.dt;
      PlotSeries s{name.str(), {}, {}, false};
      const std::size_t stride = std::max<std::size_t>(1, run.t.size() / 1000);
      for (std::size_t n = 0; n < run.t.size(); n += stride) {
        s.x.push_back(run.t[n]);
        s.y.push_back(run.ratio[n]);
      }
      series.push_back(std::move(s));
    }
    write_svg_plot(out / "energy_drift.svg", {"Energy ratio", "t", "E(t) / E(0)", false, false}, series);
  }
  return lines;
}

// ----------------------------------------------------------------------------
// pulse
// ----------------------------------------------------------------------------

namespace pulse {

/// Initial transverse displacement exp(-100 (x - L/2)^2).
inline double profile(double x, double L) { return std::exp(-100.0 * (x - 0.5 * L) * (x - 0.5 * L)); }

/// 1/2 d/dx of the profile.
inline double rotation(double x, double L) { return 0.5 * (100.0 * L - 200.0 * x) * profile(x, L); }

/// -eta d^3/dx^3 of the profile, the multiplier consistent with the discrete coupling.
inline double multiplier(double x, double L, double eta) {
  const double z = x - 0.5 * L;
  return eta * 40000.0 * z * (200.0 * z * z - 3.0) * profile(x, L);
}

/// Non-dispersive reference: d'Alembert with speed c and odd reflections at x = 0 and x = L.
inline double reference(double x, double t, double c, double L) {
  auto odd = [L](double z) {
    double p = z;
    if (p < -L || p >= L) {
      p = std::fmod(z + L, 2.0 * L);
      if (p < 0) p += 2.0 * L;
      p -= L;
    }
    return p >= 0 ? profile(p, L) : -profile(-p, L);
  };
  return 0.5 * (odd(x - c * t) + odd(x + c * t));
}

}  // namespace pulse

struct ProfileSnapshot {
  std::size_t step = 0;
  double t = 0;
  std::vector<double> x, uy, reference;
  double correlation = 0;
};

struct PulseRun {
  std::string model;
  Trajectory trajectory;
  std::vector<ProfileSnapshot> profiles;
  [[nodiscard]] double final_correlation() const { return profiles.back().correlation; }
};

struct PulseResult {
  PulseRun ccst, classical;
  Material material;
  double line_y = 0;
};

inline double cosine_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return aa > 0 && bb > 0 ? ab / std::sqrt(aa * bb) : 0.0;
}

inline PulseRun pulse_run(const Model& model, const ExperimentConfig& c, double line_y,
                          const std::filesystem::path& out = {}) {
  const Mesh& mesh = model.sys.mesh;
  std::vector<std::size_t> line;
  for (std::size_t n = 0; n < mesh.num_nodes(); ++n)
    if (std::abs(mesh.node(n).y() - line_y) <= mesh.tolerance()) line.push_back(n);
  if (line.empty()) throw InputError("no node row at y = " + std::to_string(line_y) + "; use an even geometry.ny");
  std::sort(line.begin(), line.end(), [&](auto a, auto b) { return mesh.node(a).x() < mesh.node(b).x(); });

  const double L = c.width;
  const double speed = std::sqrt(model.sys.material.mu / model.sys.material.rho);
  const NodalFields init = apply_initial_fields(
      mesh, [L](const Eigen::Vector2d& x) { return Eigen::Vector2d(0.0, pulse::profile(x.x(), L)); }, {},
      [L](const Eigen::Vector2d& x) { return pulse::rotation(x.x(), L); },
      [L, &c](const Eigen::Vector2d& x) { return pulse::multiplier(x.x(), L, c.eta); });
  const Vec u0 = model.sys.dofs.restrict_u(init.u);
  const MarchState s0 = bootstrap(model.ops, u0, model.sys.dofs.restrict_u(init.v), c.start);

  if (c.vtk && !out.empty())
    write_vtk(out / "vtk" / ("initial_" + model.name + ".vtk"), mesh, init.u, init.theta, init.s);

  PulseRun run;
  run.model = model.name;
  const std::size_t stride = c.profile_stride ? c.profile_stride : c.steps;
  const StepHook vtk = out.empty() ? StepHook{} : vtk_hook(c, model.sys, out, model.name, c.steps);
  auto hook = [&](const MarchState& s, const FullFields& f) {
    if (s.step % stride == 0 || s.step == c.steps) {
      ProfileSnapshot p;
      p.step = s.step;
      p.t = s.t;
      for (auto n : line) {
        p.x.push_back(mesh.node(n).x());
        p.uy.push_back(f.u(Eigen::Index(2 * n + 1)));
        p.reference.push_back(pulse::reference(mesh.node(n).x(), s.t, speed, L));
      }
      p.correlation = cosine_correlation(p.uy, p.reference);
      run.profiles.push_back(std::move(p));
    }
    if (vtk) vtk(s, f);
  };
  run.trajectory = run_trajectory(model.sys, model.ops, s0, c.steps, make_probes(mesh, c.probes), hook);
  return run;
}

inline PulseResult pulse_study(const ExperimentConfig& c, std::size_t threads = 1,
                               const std::filesystem::path& out = {}) {
  const auto models = model_pair(c, c.dt, threads);
  const double line_y = 0.5 * c.height;
  auto runs = parallel_map(2, [&](std::size_t i) { return pulse_run(models[i], c, line_y, out); }, threads);
  return {std::move(runs[0]), std::move(runs[1]), c.material(), line_y};
}

inline std::vector<std::string> write_pulse(const PulseResult& r, const ExperimentConfig& c,
                                            const std::filesystem::path& out) {
  CsvWriter prof(out / "pulse_profiles.csv", {"model", "step", "t", "x", "uy", "uy_reference"});
  CsvWriter summary(out / "pulse_summary.csv", {"model", "step", "t", "correlation"});
  for (const auto* run : {&r.ccst, &r.classical})
    for (const auto& p : run->profiles) {
      for (std::size_t i = 0; i < p.x.size(); ++i) prof.write(run->model, p.step, p.t, p.x[i], p.uy[i], p.reference[i]);
      summary.write(run->model, p.step, p.t, p.correlation);
    }
  write_timeseries(out / "timeseries_ccst.csv", r.ccst.trajectory.samples);
  write_timeseries(out / "timeseries_classical.csv", r.classical.trajectory.samples);

  CsvWriter disp(out / "dispersion.csv", {"k", "omega_classical", "omega_ccst", "phase_speed_ccst"});
  const Material classical = derive(c.E, c.nu, c.rho, 0.0);
  for (int i = 0; i <= 120; ++i) {
    const double k = 0.5 * i;
    const double w = dispersion_relation(r.material, k);
    disp.write(k, dispersion_relation(classical, k), w, k > 0 ? w / k : std::sqrt(r.material.mu / r.material.rho));
  }

  if (c.svg) {
    std::vector<PlotSeries> series;
    const auto& pc = r.ccst.profiles.back();
    const auto& pk = r.classical.profiles.back();
    series.push_back({"ccst", pc.x, pc.uy, false});
    series.push_back({"classical", pk.x, pk.uy, false});
    series.push_back({"reference", pk.x, pk.reference, false});
    std::ostringstream title;
    title << "uy at y = " << r.line_y << ", t = " << pk.t;
    write_svg_plot(out / "pulse_profiles.svg", {title.str(), "x", "uy", false, false}, series);
  }

  std::vector<std::string> lines;
  std::ostringstream a;
  a << "l = sqrt(eta/mu) = " << r.material.l << ", h/l = " << c.height / r.material.l;
  lines.push_back(a.str());
  for (const auto* run : {&r.ccst, &r.classical}) {
    std::ostringstream l;
    l << run->model << ": correlation with the non-dispersive reference at t = " << run->profiles.back().t << " is "
      << run->final_correlation();
    lines.push_back(l.str());
  }
  return lines;
}

// ----------------------------------------------------------------------------
// Dispatch
// ----------------------------------------------------------------------------

/// Runs the configured experiment, writes its artifacts and the resolved
/// config under `out`, and returns human-readable summary lines.
inline std::vector<std::string> run_experiment(const ExperimentConfig& c, const std::filesystem::path& out,
                                               std::size_t threads = 1) {
  std::filesystem::create_directories(out);
  {
    auto echo = open_output(out / "config.resolved.ini");
    echo << resolved_config(c);
  }
  if (c.experiment == "cantilever-rigidity") return write_rigidity(cantilever_rigidity(c, threads), c, out);
  if (c.experiment == "mms-static") return write_mms(mms_convergence(c, threads), c, out);
  if (c.experiment == "eigen-evolve") return write_eigen_evolve(eigen_evolve(c, threads, out), c, out);
  if (c.experiment == "energy-drift") return write_energy_drift(energy_drift(c, threads), c, out);
  if (c.experiment == "pulse") return write_pulse(pulse_study(c, threads, out), c, out);
  throw InputError("unknown experiment '" + c.experiment + "'");
}

}  // namespace ccst
