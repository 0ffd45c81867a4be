#include <string>

#include <gtest/gtest.h>

#include "ccst/config.hpp"

using namespace ccst;

namespace {

std::string error_of(const std::string& experiment, const std::string& text) {
  try {
    parse_config_text(experiment, text);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
  for (const auto& name : experiment_names()) EXPECT_NO_THROW(parse_config_text(name, "")) << name;
  const auto c = parse_config_text("eigen-evolve", "");
  EXPECT_EQ(c.nx * c.ny, 48u);
  EXPECT_DOUBLE_EQ(c.width, 10.0);
  EXPECT_DOUBLE_EQ(c.eta, 0.1);
  EXPECT_DOUBLE_EQ(c.dt, 0.5);
  EXPECT_EQ(c.steps, 1000u);
  EXPECT_EQ(c.probes.size(), 5u);
}

TEST(Config, PulseDefaults) {
  const auto c = parse_config_text("pulse", "");
  EXPECT_DOUBLE_EQ(c.width, 1.5);
  EXPECT_DOUBLE_EQ(c.height, 0.3);
  EXPECT_DOUBLE_EQ(c.dt, 0.001);
  EXPECT_EQ(c.steps, 3500u);
  EXPECT_DOUBLE_EQ(c.t_final(), 3.5);
  EXPECT_DOUBLE_EQ(c.eta, 0.001);
}

TEST(Config, EnergyDriftDefaults) {
  const auto c = parse_config_text("energy-drift", "");
  ASSERT_EQ(c.dt_list.size(), 3u);
  EXPECT_DOUBLE_EQ(c.dt_list[0], 0.1);
  EXPECT_DOUBLE_EQ(c.dt_list[2], 0.01);
  EXPECT_DOUBLE_EQ(c.t_final(), 100.0);
  EXPECT_EQ(c.mode, 5u);
}

TEST(Config, OverridesAndComments) {
  const auto c = parse_config_text("eigen-evolve",
                                   "; comment\n"
                                   "# another\n"
                                   "[geometry]\n"
                                   "nx = 12\n"
                                   "[time]\n"
                                   "dt = 0.25\n"
                                   "t_final = 10\n"
                                   "start = first_order\n"
                                   "[probes]\n"
                                   "points = 1 0.5; 2 0.25\n"
                                   "[boundary]\n"
                                   "left = ux, uy, theta\n"
                                   "right_traction = 0, -1\n"
                                   "top = free\n");
  EXPECT_EQ(c.nx, 12u);
  EXPECT_EQ(c.steps, 40u);
  EXPECT_EQ(c.start, StartRule::first_order);
  ASSERT_EQ(c.probes.size(), 2u);
  EXPECT_DOUBLE_EQ(c.probes[1].y(), 0.25);
  const auto tags = c.tags();
  bool loaded = false;
  for (const auto& t : tags)
    if (t.side == Side::right) loaded = t.traction.y() == -1.0;
  EXPECT_TRUE(loaded);
}

TEST(Config, FieldLevelErrors) {
  EXPECT_NE(error_of("pulse", "[material]\nnu = 0.5\n").find("material.nu"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[material]\nE = abc\n").find("material.E"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[time]\ndt = 0\n").find("time.dt"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[time]\nt_final = -1\n").find("time.t_final"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[time]\nt_final = 0.0015\n").find("whole number"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[time]\nsteps = 10\nt_final = 1\n").find("disagree"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[geometry]\nnx = 0\n").find("geometry.nx"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[geometry]\nnx = 2.5\n").find("geometry.nx"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[material]\ncolour = red\n").find("unknown key material.colour"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[extras]\na = 1\n").find("unknown section"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[probes]\npoints = 1\n").find("probes.points"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[probes]\npoints = 9 0.1\n").find("outside"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[boundary]\nleft = ux, spin\n").find("boundary.left"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[boundary]\nleft = pinned\n").find("theta"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[modes]\nmode = 0\n").find("modes.mode"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[output]\nvtk = maybe\n").find("output.vtk"), std::string::npos);
  EXPECT_NE(error_of("mms-static", "[sweep]\nmesh_sizes = 0.5\n").find("mesh_sizes"), std::string::npos);
  EXPECT_NE(error_of("mms-static", "[boundary]\nleft = free\n").find("fixed by the experiment"), std::string::npos);
  EXPECT_NE(error_of("energy-drift", "[sweep]\ndt = 0.1, -0.05\n").find("sweep.dt"), std::string::npos);
  EXPECT_NE(error_of("cantilever-rigidity", "[sweep]\nh_over_l = 0\n").find("sweep.h_over_l"), std::string::npos);
  EXPECT_NE(error_of("pulse", "orphan = 1\n").find("outside any"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[material\nE = 1\n").find("syntax"), std::string::npos);
  EXPECT_NE(error_of("pulse", "[material]\nE = 1\nE = 2\n").find("syntax"), std::string::npos);
}

TEST(Config, UnknownExperiment) { EXPECT_THROW(default_config("nope"), InputError); }

TEST(Config, ResolvedEchoRoundTrips) {
  for (const auto& name : experiment_names()) {
    const auto a = parse_config_text(name, "");
    const std::string echo = resolved_config(a);
    const auto b = parse_config_text(name, echo);
    EXPECT_EQ(resolved_config(b), echo) << name;
  }
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("pulse", "/nonexistent/ccst.ini"), InputError); }
