#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "hardylab/errors.hpp"
#include "hardylab/mesh.hpp"

using namespace hardylab;
using namespace hardylab::mesh;

namespace {

const double pi = std::numbers::pi;
const Domain unit = Domain::interval(0, 1);

std::vector<double> expect_nodes(const Mesh1D& m, std::vector<double> want, double tol = 1e-15) {
  EXPECT_EQ(m.nodes.size(), want.size());
  for (std::size_t i = 0; i < std::min(want.size(), m.nodes.size()); ++i) EXPECT_NEAR(m.nodes[i], want[i], tol) << i;
  return m.nodes;
}

using Tri = std::array<std::pair<double, double>, 3>;

std::set<Tri> triangle_set(const TriMesh& m) {
  std::set<Tri> out;
  for (const auto& t : m.triangles) {
    Tri key;
    for (int k = 0; k < 3; ++k) key[k] = {m.vertices[t[k]].x(), m.vertices[t[k]].y()};
    std::sort(key.begin(), key.end());
    out.insert(key);
  }
  return out;
}

void expect_valid(const TriMesh& m) {
  for (std::size_t t = 0; t < m.num_elements(); ++t) EXPECT_GT(m.area(t), 0.0);
  ASSERT_EQ(m.distance.size(), m.num_nodes());
  for (std::size_t v = 0; v < m.num_nodes(); ++v) {
    if (m.tags[v] == NodeTag::Interior) {
      Vec2 p = m.vertices[v];
      EXPECT_NEAR(m.distance[v], geometry::boundary_distance(m.domain, geometry::point(p.x(), p.y())), 1e-14);
    }
  }
}

} // namespace

TEST(Mesh1D, UniformNodes) { expect_nodes(build_mesh_1d(unit, 4, 1.0), {0, 0.25, 0.5, 0.75, 1}); }

TEST(Mesh1D, GradedNodes) { expect_nodes(build_mesh_1d(unit, 4, 0.5), {0, 1.0 / 6, 0.5, 5.0 / 6, 1}); }

TEST(Mesh1D, SingleLayer) {
  for (double g : {1.0, 0.5, 0.1}) expect_nodes(build_mesh_1d(unit, 2, g), {0, 0.5, 1});
}

TEST(Mesh1D, GradingRatioIsExact) {
  for (int n : {8, 16, 32}) {
    for (double g : {0.9, 0.5, 0.3}) {
      auto m = build_mesh_1d(unit, n, g);
      auto s = stats(m);
      EXPECT_NEAR(s.max_size / s.min_size, std::pow(g, 1.0 - n / 2), 1e-9 * std::pow(g, 1.0 - n / 2));
      EXPECT_NEAR(m.element_length(0), m.element_length(m.num_elements() - 1), 1e-15);
    }
  }
}

TEST(Mesh1D, UnrepresentableGradingRejected) {
  try {
    (void)build_mesh_1d(unit, 64, 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidGrading);
  }
}

TEST(Mesh1D, DistancesAreSymmetric) {
  const int n = 4096;
  auto m = build_mesh_1d(unit, n, default_grading_1d(n));
  ASSERT_TRUE(m.has_distance());
  for (int i = 0; i <= n; ++i) EXPECT_EQ(m.distance[i], m.distance[n - i]);
  EXPECT_EQ(m.element_length(0), m.element_length(n - 1));
  EXPECT_GT(m.element_length(n - 1), 0.0);
}

TEST(Mesh1D, EndpointsAreDirichlet) {
  auto m = build_mesh_1d(Domain::interval(-2, 3), 10, 0.7);
  EXPECT_EQ(m.tags.front(), NodeTag::Dirichlet);
  EXPECT_EQ(m.tags.back(), NodeTag::Dirichlet);
  EXPECT_DOUBLE_EQ(m.nodes.front(), -2.0);
  EXPECT_DOUBLE_EQ(m.nodes.back(), 3.0);
  EXPECT_NEAR(stats(m).measure, 5.0, 1e-14);
}

TEST(Mesh1D, BadArguments) {
  EXPECT_THROW(build_mesh_1d(unit, 3, 1.0), Error);
  EXPECT_THROW(build_mesh_1d(unit, 4, 0.0), Error);
  EXPECT_THROW(build_mesh_1d(unit, 4, 1.5), Error);
  EXPECT_THROW(build_mesh_1d(Domain::disc({0, 0}, 1), 4, 1.0), Error);
}

TEST(Mesh1D, DefaultGradingStaysRepresentable) {
  for (int n : {16, 256, 4096, 16384}) {
    double g = default_grading_1d(n);
    EXPECT_GE(g, 0.15);
    EXPECT_LE(g, 1.0);
    auto s = stats(build_mesh_1d(unit, n, g));
    EXPECT_GT(s.min_size, 0.0);
    EXPECT_NEAR(s.measure, 1.0, 1e-12);
  }
}

TEST(TriMesh, StructuredSquare) {
  auto m = build_trimesh(Domain::rectangle(0, 0, 1, 1), 0.125, 1.0);
  ASSERT_EQ(m.num_elements(), 128u);
  for (std::size_t t = 0; t < 128; ++t) EXPECT_NEAR(m.area(t), 1.0 / 128, 1e-15);
  expect_valid(m);
}

TEST(TriMesh, DiscElementCountBand) {
  auto m = build_trimesh(Domain::disc({0, 0}, 1), 0.2);
  const double nominal = pi / (0.5 * 0.2 * 0.2);
  EXPECT_GE(m.num_elements(), 0.5 * nominal);
  EXPECT_LE(m.num_elements(), 2.0 * nominal);
  expect_valid(m);
}

TEST(TriMesh, GradedSquareBoundaryElements) {
  auto m = build_trimesh(Domain::rectangle(0, 0, 1, 1), 0.125, 0.25);
  EXPECT_LE(max_boundary_element_diameter(m), 0.125 * 0.25 * std::sqrt(2.0) + 1e-12);
  expect_valid(m);
}

TEST(TriMesh, MeasureAgreement) {
  auto sq = build_trimesh(Domain::rectangle(-1, 0, 2, 0.5), 0.1, 0.3);
  EXPECT_LE(std::abs(stats(sq).measure_defect), 1e-6);
  auto poly = build_trimesh(Domain::polygon({{0, 0}, {2, 0}, {2.5, 1}, {1, 2}, {-0.5, 1}}), 0.1, 0.5);
  EXPECT_LE(std::abs(stats(poly).measure_defect), 1e-6);
  expect_valid(poly);
  auto disc = build_trimesh(Domain::disc({0.5, 0.5}, 1), 0.05, 0.5);
  EXPECT_LE(std::abs(stats(disc).measure_defect), 1e-3);
  auto ann = build_trimesh(Domain::annulus({0, 0}, 0.5, 1), 0.05);
  EXPECT_LE(std::abs(stats(ann).measure_defect), 1e-3);
  expect_valid(ann);
}

TEST(TriMesh, TooCoarseRejected) {
  try {
    (void)build_trimesh(Domain::disc({0, 0}, 1), 0.6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MeshGenerationFailure);
  }
}

TEST(TriMesh, RefinementQuadruplesAndPreservesArea) {
  auto m = build_trimesh(Domain::rectangle(0, 0, 1, 1), 0.125, 1.0);
  auto r = refine_uniform(m);
  EXPECT_EQ(r.num_elements(), 4 * m.num_elements());
  EXPECT_NEAR(stats(r).measure, 1.0, 1e-14);
  expect_valid(r);
  auto disc = refine_uniform(build_trimesh(Domain::disc({0, 0}, 1), 0.2));
  expect_valid(disc);
  // projected boundary midpoints shrink the polygonal defect
  EXPECT_LT(std::abs(stats(disc).measure_defect),
            std::abs(stats(build_trimesh(Domain::disc({0, 0}, 1), 0.2)).measure_defect));
}

TEST(Strip1D, TwoComponents) {
  auto m = build_mesh_1d(unit, 64, default_grading_1d(64));
  auto s = restrict_to_strip(m, {0.0, 0.25});
  double gap_lo = 0, gap_hi = 0;
  for (std::size_t e = 0; e + 1 < s.num_elements(); ++e)
    if (s.elements[e][1] != s.elements[e + 1][0]) {
      gap_lo = s.nodes[s.elements[e][1]];
      gap_hi = s.nodes[s.elements[e + 1][0]];
    }
  EXPECT_NEAR(gap_lo, 0.25, 1e-12);
  EXPECT_NEAR(gap_hi, 0.75, 1e-12);
  EXPECT_DOUBLE_EQ(s.nodes.front(), 0.0);
  EXPECT_DOUBLE_EQ(s.nodes.back(), 1.0);
  int dirichlet = 0;
  for (auto t : s.tags) dirichlet += t == NodeTag::Dirichlet;
  EXPECT_EQ(dirichlet, 4);
}

TEST(Strip1D, HalfWidthIsWholeMesh) {
  auto m = build_mesh_1d(unit, 64, 1.0);
  auto s = restrict_to_strip(m, {0.0, 0.5});
  EXPECT_EQ(s.num_elements(), m.num_elements());
  EXPECT_NEAR(stats(s).measure, 1.0, 1e-14);
  EXPECT_EQ(s.tags[s.nodes.size() / 2], NodeTag::Dirichlet);  // d = 1/2 is the inner interface
}

TEST(Strip1D, TooThin) {
  try {
    (void)restrict_to_strip(build_mesh_1d(unit, 16, 1.0), {0.0, 0.01});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StripTooThin);
  }
}

TEST(Strip2D, InterfaceTaggedAndNested) {
  auto m = build_trimesh(Domain::disc({0, 0}, 1), 0.05, 0.5);
  auto narrow = restrict_to_strip(m, {0.0, 0.2});
  auto wide = restrict_to_strip(m, {0.0, 0.4});
  bool has_interface = false;
  for (const auto& e : narrow.boundary_edges) has_interface = has_interface || !e.on_domain_boundary;
  EXPECT_TRUE(has_interface);
  auto inner = triangle_set(narrow), outer = triangle_set(wide);
  for (const auto& t : inner) EXPECT_TRUE(outer.count(t));
  EXPECT_LT(inner.size(), outer.size());
  expect_valid(narrow);
}

TEST(Strip1D, Nested) {
  auto m = build_mesh_1d(unit, 256, 1.0);
  auto a = restrict_to_strip(m, {0.0, 0.1});
  auto b = restrict_to_strip(m, {0.0, 0.3});
  EXPECT_LT(stats(a).measure, stats(b).measure);
  std::set<double> bn(b.nodes.begin(), b.nodes.end());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    if (a.tags[i] == NodeTag::Dirichlet && a.distance[i] > 0.0) continue;  // clipped interface
    EXPECT_TRUE(bn.count(a.nodes[i])) << a.nodes[i];
  }
}

TEST(Axisymmetric, Reduction) {
  auto r0 = axisymmetric_reduce(Domain::torus(3, 1), 0);
  const auto* disc = r0.cross_section.as<geometry::Disc>();
  ASSERT_NE(disc, nullptr);
  EXPECT_DOUBLE_EQ(disc->center.x(), 3.0);
  EXPECT_DOUBLE_EQ(disc->center.y(), 0.0);
  EXPECT_DOUBLE_EQ(disc->radius, 1.0);
  forms::EvalContext ctx;
  ctx.r = ctx.x1 = 2.5;
  EXPECT_DOUBLE_EQ(r0.weight.eval(ctx), 2.5);
  EXPECT_DOUBLE_EQ(r0.potential.eval(ctx), 0.0);
  auto r2 = axisymmetric_reduce(Domain::torus(3, 1), 2);
  EXPECT_DOUBLE_EQ(r2.potential.eval(ctx), 4.0 / (2.5 * 2.5));
  EXPECT_THROW(axisymmetric_reduce(Domain::disc({0, 0}, 1), 0), Error);
}

TEST(Axisymmetric, MeshIsTagged) {
  auto m = build_axisymmetric_mesh(axisymmetric_reduce(Domain::torus(3, 1), 0), 0.2);
  EXPECT_EQ(m.coords, CoordinateSystem::Axisymmetric);
  for (const auto& v : m.vertices) EXPECT_GT(v.x(), 1.9);
}

TEST(MeshIO, HeaderAndCounts) {
  std::ostringstream os;
  auto m = build_mesh_1d(unit, 4, 1.0);
  write_mesh(os, m);
  std::istringstream is(os.str());
  std::string magic;
  int version = 0;
  is >> magic >> version;
  EXPECT_EQ(magic, "hardylab-mesh");
  EXPECT_EQ(version, 1);
  EXPECT_NE(os.str().find("0.25"), std::string::npos);
}
