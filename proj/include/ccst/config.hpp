#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ccst/assembly.hpp"
#include "ccst/dynamics.hpp"
#include "ccst/errors.hpp"
#include "ccst/material.hpp"
#include "ccst/mesh.hpp"

namespace ccst {

/*
 * Experiment configuration files.
 *
 * INI-style text: "[section]" headers, "key = value" lines, ";" or "#"
 * comments. Lists are comma-separated; probe points are "x y" pairs
 * separated by ";". Every key is optional: defaults depend on the
 * experiment and are echoed in full by resolved_config().
 *
 *   [geometry]  width, height, nx, ny
 *   [material]  E, nu, rho, eta
 *   [boundary]  left, right, bottom, top     = clamped | pinned | free | list of ux, uy, theta
 *               <side>_traction = tx, ty      <side>_couple = m
 *   [time]      dt, steps | t_final, start = taylor | first_order
 *   [probes]    points = x y; x y; ...
 *   [sweep]     h_over_l, mesh_sizes, dt     (lists)
 *   [modes]     mode (1-based), count, amplitude
 *   [load]      total                        (cantilever tip load)
 *   [output]    vtk = true|false, vtk_stride, profile_stride, svg = true|false
 */

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"cantilever-rigidity", "mms-static", "eigen-evolve", "energy-drift",
                                              "pulse"};
  return names;
}

struct SideSpec {
  bool ux = false, uy = false, theta = false;
  Eigen::Vector2d traction = Eigen::Vector2d::Zero();
  double couple = 0.0;
};

struct ExperimentConfig {
  std::string experiment;

  double width = 1, height = 1;
  std::size_t nx = 1, ny = 1;

  double E = 1, nu = 0.29, rho = 1, eta = 0.1;

  std::map<Side, SideSpec> boundary;

  double dt = 0.01;
  std::size_t steps = 100;
  StartRule start = StartRule::taylor;

  std::vector<Eigen::Vector2d> probes;

  std::vector<double> h_over_l, mesh_sizes, dt_list;

  std::size_t mode = 1, mode_count = 16;
  double amplitude = 1.0;
  double load = 1.0;

  bool vtk = false, svg = true;
  std::size_t vtk_stride = 0, profile_stride = 500;

  [[nodiscard]] double t_final() const { return double(steps) * dt; }
  [[nodiscard]] Material material() const { return derive(E, nu, rho, eta); }

  [[nodiscard]] std::vector<BoundaryTag> tags() const {
    std::vector<BoundaryTag> out;
    for (const auto& [side, spec] : boundary) {
      BoundaryTag t;
      t.side = side;
      if (spec.ux) t.ux = 0.0;
      if (spec.uy) t.uy = 0.0;
      if (spec.theta) t.theta = 0.0;
      t.traction = spec.traction;
      t.couple_traction = spec.couple;
      out.push_back(t);
    }
    return out;
  }
};

namespace detail {

inline SideSpec side_spec(bool ux, bool uy, bool theta) {
  SideSpec s;
  s.ux = ux;
  s.uy = uy;
  s.theta = theta;
  return s;
}

inline std::vector<Eigen::Vector2d> probes_along(double y, std::initializer_list<double> xs) {
  std::vector<Eigen::Vector2d> out;
  for (double x : xs) out.emplace_back(x, y);
  return out;
}

}  // namespace detail

/// Defaults for each experiment, taken from the reported setups.
inline ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "cantilever-rigidity") {
    c.width = 20, c.height = 1, c.nx = 40, c.ny = 4;
    c.E = 2, c.nu = 0, c.rho = 1, c.eta = 0;
    c.boundary[Side::left] = detail::side_spec(true, true, true);
    c.h_over_l = {100, 30, 10, 3, 1, 0.3};
    c.load = 1.0;
  } else if (experiment == "mms-static") {
    c.width = 1, c.height = 1, c.nx = 0, c.ny = 0;
    c.E = 1, c.nu = 0.29, c.rho = 1, c.eta = 0.001;
    for (Side s : kAllSides) c.boundary[s] = detail::side_spec(true, true, true);
    c.mesh_sizes = default_mms_sizes();
  } else if (experiment == "eigen-evolve") {
    c.width = 10, c.height = 1, c.nx = 24, c.ny = 2;
    c.E = 1, c.nu = 0.29, c.rho = 1, c.eta = 0.1;
    c.boundary[Side::left] = detail::side_spec(true, true, true);
    c.dt = 0.5, c.steps = 1000;
    c.mode = 1;
    c.probes = detail::probes_along(0.5, {2, 4, 6, 8, 10});
  } else if (experiment == "energy-drift") {
    c.width = 10, c.height = 1, c.nx = 24, c.ny = 2;
    c.E = 1, c.nu = 0.29, c.rho = 1, c.eta = 0.1;
    c.boundary[Side::left] = detail::side_spec(true, true, true);
    c.dt = 0.1, c.steps = 1000;
    c.dt_list = {0.1, 0.05, 0.01};
    c.mode = 5;
    c.probes = detail::probes_along(0.5, {10});
  } else if (experiment == "pulse") {
    c.width = 1.5, c.height = 0.3, c.nx = 30, c.ny = 6;
    c.E = 1, c.nu = 0.29, c.rho = 1, c.eta = 0.001;
    c.boundary[Side::left] = detail::side_spec(true, true, true);
    c.boundary[Side::right] = detail::side_spec(true, true, false);
    c.boundary[Side::bottom] = detail::side_spec(true, false, false);
    c.boundary[Side::top] = detail::side_spec(true, false, false);
    c.dt = 0.001, c.steps = 3500;
    c.probes = detail::probes_along(0.15, {0.375, 0.75, 1.125});
    c.profile_stride = 500;
  } else {
    std::string list;
    for (const auto& n : experiment_names()) list += (list.empty() ? "" : ", ") + n;
    throw InputError("unknown experiment '" + experiment + "' (expected one of: " + list + ")");
  }
  return c;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline double to_double(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw InputError(field + " = '" + text + "' is not a number");
  return v;
}

inline std::size_t to_count(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InputError(field + " = '" + text + "' is not a non-negative integer");
  return v;
}

inline bool to_bool(const std::string& field, const std::string& text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return char(std::tolower(ch)); });
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw InputError(field + " = '" + text + "' is not a boolean");
}

inline std::vector<double> to_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(to_double(field, item));
  if (out.empty()) throw InputError(field + " is an empty list");
  return out;
}

inline SideSpec to_side(const std::string& field, const std::string& text, SideSpec keep) {
  const std::string t = trim(text);
  keep.ux = keep.uy = keep.theta = false;
  if (t == "clamped") {
    keep.ux = keep.uy = keep.theta = true;
  } else if (t == "pinned") {
    keep.ux = keep.uy = true;
  } else if (t != "free") {
    for (const auto& item : split(t, ',')) {
      if (item == "ux") keep.ux = true;
      else if (item == "uy") keep.uy = true;
      else if (item == "theta") keep.theta = true;
      else
        throw InputError(field + " = '" + text +
                         "': expected clamped, pinned, free or a list of ux, uy, theta");
    }
  }
  return keep;
}

/// Shortest text that parses back to the same double.
inline std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ", ") + fmt(x);
  return out;
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  auto positive = [](const std::string& field, double v) {
    if (!(v > 0.0)) throw InputError(field + " = " + detail::fmt(v) + " must be positive");
  };
  positive("geometry.width", c.width);
  positive("geometry.height", c.height);
  if (c.experiment != "mms-static") {
    if (c.nx == 0) throw InputError("geometry.nx must be at least 1");
    if (c.ny == 0) throw InputError("geometry.ny must be at least 1");
  }
  (void)derive(c.E, c.nu, c.rho, c.eta);
  positive("time.dt", c.dt);
  if (c.steps == 0) throw InputError("time.steps must be at least 1 (t_final > 0)");
  for (double v : c.h_over_l) positive("sweep.h_over_l", v);
  for (double v : c.mesh_sizes)
    if (!(v > 0.0 && v <= 1.0)) throw InputError("sweep.mesh_sizes entry " + detail::fmt(v) + " must lie in (0, 1]");
  for (double v : c.dt_list) positive("sweep.dt", v);
  if (c.mode == 0) throw InputError("modes.mode is 1-based and must be at least 1");
  if (c.mode_count < c.mode) throw InputError("modes.count must be at least modes.mode");
  positive("modes.amplitude", c.amplitude);
  for (const auto& p : c.probes)
    if (p.x() < 0 || p.x() > c.width || p.y() < 0 || p.y() > c.height)
      throw InputError("probes.points entry (" + detail::fmt(p.x()) + " " + detail::fmt(p.y()) +
                       ") lies outside the domain");
  if (c.experiment == "cantilever-rigidity" && c.h_over_l.empty())
    throw InputError("sweep.h_over_l is required for cantilever-rigidity");
  if (c.experiment == "mms-static" && c.mesh_sizes.size() < 2)
    throw InputError("sweep.mesh_sizes needs at least two entries");
  if (c.experiment == "energy-drift" && c.dt_list.empty()) throw InputError("sweep.dt is required for energy-drift");
  if ((c.experiment == "eigen-evolve" || c.experiment == "energy-drift" || c.experiment == "pulse") &&
      !c.material().classical() && std::none_of(c.boundary.begin(), c.boundary.end(), [](const auto& kv) {
        return kv.second.theta;
      }))
    throw InputError("boundary: eta > 0 needs theta prescribed on at least one side");
}

/// Defaults for `experiment` overridden by the INI text.
inline ExperimentConfig parse_config(const std::string& experiment, std::istream& in) {
  ExperimentConfig c = default_config(experiment);
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InputError("config syntax error at line " + std::to_string(e.line()) + ": " + e.message());
  }

  const bool boundary_fixed = experiment == "cantilever-rigidity" || experiment == "mms-static";
  std::optional<double> t_final;
  bool steps_given = false;

  for (const auto& [section, tree] : pt) {
    if (tree.empty() && !tree.data().empty())
      throw InputError("key '" + section + "' appears outside any [section]");
    for (const auto& [key, node] : tree) {
      const std::string field = section + "." + key;
      const std::string& v = node.data();
      if (section == "geometry") {
        if (key == "width") c.width = detail::to_double(field, v);
        else if (key == "height") c.height = detail::to_double(field, v);
        else if (key == "nx") c.nx = detail::to_count(field, v);
        else if (key == "ny") c.ny = detail::to_count(field, v);
        else throw InputError("unknown key " + field);
      } else if (section == "material") {
        if (key == "E") c.E = detail::to_double(field, v);
        else if (key == "nu") c.nu = detail::to_double(field, v);
        else if (key == "rho") c.rho = detail::to_double(field, v);
        else if (key == "eta") c.eta = detail::to_double(field, v);
        else throw InputError("unknown key " + field);
      } else if (section == "boundary") {
        if (boundary_fixed)
          throw InputError(field + ": boundary conditions of " + experiment + " are fixed by the experiment");
        bool matched = false;
        for (Side s : kAllSides) {
          const std::string name(to_string(s));
          if (key == name) {
            c.boundary[s] = detail::to_side(field, v, c.boundary[s]);
            matched = true;
          } else if (key == name + "_traction") {
            const auto xy = detail::to_list(field, v);
            if (xy.size() != 2) throw InputError(field + " needs two components");
            c.boundary[s].traction = {xy[0], xy[1]};
            matched = true;
          } else if (key == name + "_couple") {
            c.boundary[s].couple = detail::to_double(field, v);
            matched = true;
          }
        }
        if (!matched) throw InputError("unknown key " + field);
      } else if (section == "time") {
        if (key == "dt") c.dt = detail::to_double(field, v);
        else if (key == "steps") c.steps = detail::to_count(field, v), steps_given = true;
        else if (key == "t_final") t_final = detail::to_double(field, v);
        else if (key == "start") {
          const std::string t = detail::trim(v);
          if (t == "taylor") c.start = StartRule::taylor;
          else if (t == "first_order") c.start = StartRule::first_order;
          else throw InputError(field + " = '" + v + "': expected taylor or first_order");
        } else throw InputError("unknown key " + field);
      } else if (section == "probes") {
        if (key != "points") throw InputError("unknown key " + field);
        c.probes.clear();
        for (const auto& item : detail::split(v, ';')) {
          if (item.empty()) continue;
          std::istringstream ps(item);
          std::string xs, ys, extra;
          if (!(ps >> xs >> ys) || (ps >> extra)) throw InputError(field + ": '" + item + "' is not an 'x y' pair");
          c.probes.emplace_back(detail::to_double(field, xs), detail::to_double(field, ys));
        }
      } else if (section == "sweep") {
        if (key == "h_over_l") c.h_over_l = detail::to_list(field, v);
        else if (key == "mesh_sizes") c.mesh_sizes = detail::to_list(field, v);
        else if (key == "dt") c.dt_list = detail::to_list(field, v);
        else throw InputError("unknown key " + field);
      } else if (section == "modes") {
        if (key == "mode") c.mode = detail::to_count(field, v);
        else if (key == "count") c.mode_count = detail::to_count(field, v);
        else if (key == "amplitude") c.amplitude = detail::to_double(field, v);
        else throw InputError("unknown key " + field);
      } else if (section == "load") {
        if (key == "total") c.load = detail::to_double(field, v);
        else throw InputError("unknown key " + field);
      } else if (section == "output") {
        if (key == "vtk") c.vtk = detail::to_bool(field, v);
        else if (key == "vtk_stride") c.vtk_stride = detail::to_count(field, v);
        else if (key == "profile_stride") c.profile_stride = detail::to_count(field, v);
        else if (key == "svg") c.svg = detail::to_bool(field, v);
        else throw InputError("unknown key " + field);
      } else {
        throw InputError("unknown section [" + section + "]");
      }
    }
  }

  if (t_final) {
    if (!(*t_final > 0.0)) throw InputError("time.t_final = " + detail::fmt(*t_final) + " must be positive");
    if (!(c.dt > 0.0)) throw InputError("time.dt = " + detail::fmt(c.dt) + " must be positive");
    const double n = *t_final / c.dt;
    const double rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n))
      throw InputError("time.t_final = " + detail::fmt(*t_final) + " is not a whole number of steps of time.dt");
    if (steps_given && std::size_t(rounded) != c.steps)
      throw InputError("time.steps and time.t_final disagree");
    c.steps = std::size_t(rounded);
  }
  validate(c);
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& experiment, const std::string& text) {
  std::istringstream in(text);
  return parse_config(experiment, in);
}

inline ExperimentConfig load_config(const std::string& experiment, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file " + path.string());
  return parse_config(experiment, in);
}

/// The configuration with every default spelled out, in the input grammar.
inline std::string resolved_config(const ExperimentConfig& c) {
  using detail::fmt;
  std::ostringstream o;
  o << "; resolved configuration for " << c.experiment << "\n";
  o << "[geometry]\nwidth = " << fmt(c.width) << "\nheight = " << fmt(c.height) << "\nnx = " << c.nx
    << "\nny = " << c.ny << "\n\n";
  const Material m = c.material();
  o << "[material]\nE = " << fmt(c.E) << "\nnu = " << fmt(c.nu) << "\nrho = " << fmt(c.rho) << "\neta = " << fmt(c.eta)
    << "\n; derived: lambda = " << fmt(m.lambda) << ", mu = " << fmt(m.mu) << ", l = " << fmt(m.l) << "\n\n";
  const bool fixed = c.experiment == "cantilever-rigidity" || c.experiment == "mms-static";
  const char* lead = fixed ? "; " : "";
  o << (fixed ? "; boundary conditions are fixed by this experiment\n" : "[boundary]\n");
  for (Side s : kAllSides) {
    const auto it = c.boundary.find(s);
    const SideSpec spec = it == c.boundary.end() ? SideSpec{} : it->second;
    std::string comps;
    if (spec.ux) comps += "ux";
    if (spec.uy) comps += std::string(comps.empty() ? "" : ", ") + "uy";
    if (spec.theta) comps += std::string(comps.empty() ? "" : ", ") + "theta";
    o << lead << to_string(s) << " = " << (comps.empty() ? "free" : comps) << "\n";
    if (!spec.traction.isZero(0.0))
      o << lead << to_string(s) << "_traction = " << fmt(spec.traction.x()) << ", " << fmt(spec.traction.y()) << "\n";
    if (spec.couple != 0.0) o << lead << to_string(s) << "_couple = " << fmt(spec.couple) << "\n";
  }
  o << "\n[time]\ndt = " << fmt(c.dt) << "\nsteps = " << c.steps << "\n; t_final = " << fmt(c.t_final())
    << "\nstart = " << (c.start == StartRule::taylor ? "taylor" : "first_order") << "\n\n";
  o << "[probes]\npoints = ";
  for (std::size_t i = 0; i < c.probes.size(); ++i)
    o << (i ? "; " : "") << fmt(c.probes[i].x()) << " " << fmt(c.probes[i].y());
  o << "\n\n[sweep]\n";
  if (!c.h_over_l.empty()) o << "h_over_l = " << detail::fmt_list(c.h_over_l) << "\n";
  if (!c.mesh_sizes.empty()) o << "mesh_sizes = " << detail::fmt_list(c.mesh_sizes) << "\n";
  if (!c.dt_list.empty()) o << "dt = " << detail::fmt_list(c.dt_list) << "\n";
  o << "\n[modes]\nmode = " << c.mode << "\ncount = " << c.mode_count << "\namplitude = " << fmt(c.amplitude) << "\n\n";
  o << "[load]\ntotal = " << fmt(c.load) << "\n\n";
  o << "[output]\nvtk = " << (c.vtk ? "true" : "false") << "\nvtk_stride = " << c.vtk_stride
    << "\nprofile_stride = " << c.profile_stride << "\nsvg = " << (c.svg ? "true" : "false") << "\n";
  return o.str();
}

}  // namespace ccst
