#pragma once

#include <array>
#include <cmath>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "hardylab/expr.hpp"
#include "hardylab/geometry.hpp"

namespace hardylab::mesh {

using geometry::Domain;
using geometry::Vec2;

/// Dirichlet nodes are eliminated during assembly; Robin nodes/edges carry
/// the boundary term sigma.
enum class NodeTag { Interior, Dirichlet, Robin };

/// Axisymmetric meshes live in the (r, z) half-plane and integrate against
/// the measure r dr dz.
enum class CoordinateSystem { Cartesian, Axisymmetric };

std::string to_string(NodeTag tag);

struct Mesh1D {
  Domain domain;
  std::vector<double> nodes;                  // strictly increasing
  std::vector<std::array<int, 2>> elements;   // consecutive node pairs; gaps allowed between components
  std::vector<NodeTag> tags;
  /// d at each node, kept from the construction: near the right endpoint the
  /// coordinates of tiny graded layers are rounded, their distances are not.
  /// Empty when unknown.
  std::vector<double> distance;

  std::size_t num_nodes() const noexcept { return nodes.size(); }
  std::size_t num_elements() const noexcept { return elements.size(); }
  bool has_distance() const noexcept { return !nodes.empty() && distance.size() == nodes.size(); }
  /// |d1 - d0| when distances are known (d has slope +-1 and elements never
  /// straddle the midpoint), else the coordinate difference.
  double element_length(std::size_t e) const {
    if (has_distance()) return std::abs(distance[elements[e][1]] - distance[elements[e][0]]);
    return nodes[elements[e][1]] - nodes[elements[e][0]];
  }
};

struct BoundaryEdge {
  std::array<int, 2> v;
  NodeTag tag;
  /// False for interfaces created by restrict_to_strip.
  bool on_domain_boundary = true;
};

struct TriMesh {
  Domain domain;
  CoordinateSystem coords = CoordinateSystem::Cartesian;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;   // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<NodeTag> tags;
  std::vector<double> distance;                // exact-geometry d at each vertex

  std::size_t num_nodes() const noexcept { return vertices.size(); }
  std::size_t num_elements() const noexcept { return triangles.size(); }
  double area(std::size_t t) const;
  double diameter(std::size_t t) const;
};

using Mesh = std::variant<Mesh1D, TriMesh>;

/// {x : delta_out < d(x) < delta_in}.
struct StripSpec {
  double delta_out = 0.0;
  double delta_in = 0.0;
};

/// Symmetric mesh of an interval with n elements (n even). With grading
/// g < 1 the element sizes shrink by g per layer toward each endpoint, n/2
/// layers per side, so max/min element length is g^(1 - n/2).
Mesh1D build_mesh_1d(const Domain& interval, int n, double grading);

/// Mildest per-layer grading for n elements: max(0.15, floor^(1/(n/2 - 1)))
/// with the smallest-to-largest element ratio floor = 1e-12; keeps graded
/// ladders representable in double precision.
double default_grading_1d(int n);

/// Triangulates a polygon, disc or annulus. Axis-aligned rectangles with
/// grading 1 use a structured template; every other case uses boundary
/// rings (radial for discs/annuli, homothetic toward the Chebyshev centre
/// for polygons) with layer thickness growing from grading*h at the boundary
/// up to h. Boundary edges are tagged Dirichlet.
TriMesh build_trimesh(const Domain& domain, double h, double grading = 1.0);

Mesh1D restrict_to_strip(const Mesh1D& mesh, const StripSpec& strip);
TriMesh restrict_to_strip(const TriMesh& mesh, const StripSpec& strip);

/// Bisects every element (1D) or splits every triangle into four (2D).
/// Midpoints of curved boundary edges are projected onto the exact boundary.
Mesh1D refine_uniform(const Mesh1D& mesh);
TriMesh refine_uniform(const TriMesh& mesh);

struct AxisymmetricReduction {
  Domain cross_section;        // disc centred (c, 0), radius R, in (r, z)
  int mode = 0;
  forms::CoefficientExpr weight;     // r
  forms::CoefficientExpr potential;  // m^2 / r^2, multiplies the diffusion a
};

AxisymmetricReduction axisymmetric_reduce(const Domain& torus, int mode);
/// Cross-section mesh tagged with the axisymmetric measure.
TriMesh build_axisymmetric_mesh(const AxisymmetricReduction& reduction, double h, double grading = 1.0);

struct MeshStats {
  std::size_t nodes = 0;
  std::size_t elements = 0;
  double min_size = 0.0;
  double max_size = 0.0;
  double measure = 0.0;          // total length / area in mesh coordinates
  double measure_defect = 0.0;   // (exact - mesh measure) / exact, for full-domain meshes
};

MeshStats stats(const Mesh1D& mesh);
MeshStats stats(const TriMesh& mesh);
/// Largest diameter among triangles with a vertex on the domain boundary.
double max_boundary_element_diameter(const TriMesh& mesh);

void write_mesh(std::ostream& os, const Mesh1D& mesh);
void write_mesh(std::ostream& os, const TriMesh& mesh);

const Domain& domain_of(const Mesh& mesh);
std::size_t num_nodes(const Mesh& mesh);
std::string describe(const Mesh& mesh);

} // namespace hardylab::mesh
