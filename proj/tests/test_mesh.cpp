#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "ccst/mesh.hpp"

using namespace ccst;

TEST(Mesh, SingleElementCounts) {
  const Mesh m = build_rect_mesh(1, 1, 1, 1);
  EXPECT_EQ(m.num_nodes(), 9u);
  EXPECT_EQ(m.num_corners(), 4u);
  EXPECT_EQ(m.num_elements(), 1u);
}

TEST(Mesh, CountingFormulas) {
  const Mesh m = build_rect_mesh(10, 1, 40, 4);
  EXPECT_EQ(m.num_nodes(), 729u);
  EXPECT_EQ(m.num_corners(), 205u);
  EXPECT_EQ(m.num_elements(), 160u);
}

TEST(Mesh, PulseStripElementSize) {
  const Mesh m = build_rect_mesh(1.5, 0.3, 30, 6);
  EXPECT_EQ(m.num_elements(), 180u);
  for (const auto& el : m.elements()) {
    EXPECT_NEAR(el.size.x(), 0.05, 1e-14);
    EXPECT_NEAR(el.size.y(), 0.05, 1e-14);
  }
}

TEST(Mesh, RejectsDegenerateInput) {
  EXPECT_THROW(build_rect_mesh(0, 1, 1, 1), InputError);
  EXPECT_THROW(build_rect_mesh(1, -1, 1, 1), InputError);
  EXPECT_THROW(build_rect_mesh(1, 1, 0, 1), InputError);
  EXPECT_THROW(build_rect_mesh(1, 1, 1, 0), InputError);
}

TEST(Mesh, LocalNodeOrdering) {
  // corners counterclockwise from (-1,-1), then edge midpoints, then center
  const Mesh m = build_rect_mesh(2, 4, 1, 1);
  const auto& el = m.element(0);
  const double expected[9][2] = {{0, 0}, {2, 0}, {2, 4}, {0, 4}, {1, 0}, {2, 2}, {1, 4}, {0, 2}, {1, 2}};
  for (int a = 0; a < 9; ++a) {
    EXPECT_DOUBLE_EQ(m.node(el.nodes[a]).x(), expected[a][0]);
    EXPECT_DOUBLE_EQ(m.node(el.nodes[a]).y(), expected[a][1]);
  }
  for (int a = 0; a < 4; ++a) EXPECT_EQ(m.corner_node_ids()[el.corners[a]], el.nodes[a]);
}

TEST(Mesh, AreasSumToDomain) {
  const Mesh m = build_rect_mesh(1.5, 0.3, 30, 6);
  double area = 0;
  for (const auto& el : m.elements()) area += el.area();
  EXPECT_NEAR(area, 1.5 * 0.3, 1e-12 * 0.45);
}

TEST(Mesh, SharingPattern) {
  const Mesh m = build_rect_mesh(3, 2, 5, 3);
  std::map<std::size_t, int> edge_use, center_use;
  for (const auto& el : m.elements()) {
    for (int a = 4; a < 8; ++a) ++edge_use[el.nodes[a]];
    ++center_use[el.nodes[8]];
  }
  for (auto [n, k] : edge_use) EXPECT_LE(k, 2);
  for (auto [n, k] : center_use) EXPECT_EQ(k, 1);
}

TEST(Mesh, Deterministic) {
  const Mesh a = build_rect_mesh(1.5, 0.3, 30, 6), b = build_rect_mesh(1.5, 0.3, 30, 6);
  ASSERT_EQ(a.num_nodes(), b.num_nodes());
  for (std::size_t n = 0; n < a.num_nodes(); ++n) EXPECT_EQ(a.node(n), b.node(n));
  for (std::size_t e = 0; e < a.num_elements(); ++e) EXPECT_EQ(a.element(e).nodes, b.element(e).nodes);
}

TEST(BoundaryNodes, SingleElementLeft) {
  const auto b = boundary_nodes(build_rect_mesh(1, 1, 1, 1), Side::left);
  EXPECT_EQ(b.q2.size(), 3u);
  EXPECT_EQ(b.corners.size(), 2u);
}

TEST(BoundaryNodes, CantileverLeftEdge) {
  const Mesh m = build_rect_mesh(10, 1, 40, 4);
  EXPECT_EQ(boundary_nodes(m, Side::left).q2.size(), 9u);
  EXPECT_EQ(boundary_nodes(m, Side::left).corners.size(), 5u);
  EXPECT_EQ(boundary_nodes(m, Side::bottom).q2.size(), 81u);
}

TEST(BoundaryNodes, UnionIsTheBoundary) {
  const Mesh m = build_rect_mesh(2, 1, 4, 3);
  std::set<std::size_t> all;
  for (Side s : kAllSides)
    for (auto n : boundary_nodes(m, s).q2) all.insert(n);
  std::set<std::size_t> expected;
  for (std::size_t n = 0; n < m.num_nodes(); ++n) {
    const auto& p = m.node(n);
    if (p.x() == 0 || p.x() == 2 || p.y() == 0 || p.y() == 1) expected.insert(n);
  }
  EXPECT_EQ(all, expected);
}

TEST(BoundaryNodes, EdgesCoverSide) {
  const Mesh m = build_rect_mesh(2, 1, 4, 3);
  EXPECT_EQ(boundary_edges(m, Side::left).size(), 3u);
  EXPECT_EQ(boundary_edges(m, Side::top).size(), 4u);
}

TEST(Mesh, SideNames) {
  for (Side s : kAllSides) EXPECT_EQ(parse_side(to_string(s)), s);
  EXPECT_THROW(parse_side("middle"), InputError);
}

TEST(Mesh, NearestNodeAndLocate) {
  const Mesh m = build_rect_mesh(10, 1, 24, 2);
  const auto n = m.nearest_node({10, 0.5});
  EXPECT_DOUBLE_EQ(m.node(n).x(), 10.0);
  EXPECT_DOUBLE_EQ(m.node(n).y(), 0.5);
  const auto e = m.locate({0.1, 0.1});
  EXPECT_EQ(e, 0u);
}
