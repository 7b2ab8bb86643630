#include "hardylab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "hardylab/errors.hpp"

namespace hardylab::mesh {

namespace {

using geometry::Point;

constexpr double kLayerGrowth = 1.2;

double cross(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

Point as_point(const Vec2& v) { return Point(v.x(), v.y(), 0.0); }

std::pair<int, int> edge_key(int a, int b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); }

struct TriBuilder {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;

  int add(const Vec2& p) {
    vertices.push_back(p);
    return static_cast<int>(vertices.size()) - 1;
  }
  void tri(int a, int b, int c) { triangles.push_back({a, b, c}); }
};

// Closed ring of vertices, listed counterclockwise.
struct Ring {
  std::vector<int> ids;
};

// Merges two concentric counterclockwise rings whose vertex i sits at angle
// 2*pi*i/N (both start at angle zero).
void zip_by_angle(TriBuilder& b, const Ring& outer, const Ring& inner) {
  const std::size_t no = outer.ids.size();
  const std::size_t ni = inner.ids.size();
  std::size_t i = 0, j = 0;
  while (i < no || j < ni) {
    bool advance_outer;
    if (i == no) advance_outer = false;
    else if (j == ni) advance_outer = true;
    else advance_outer = static_cast<double>(i + 1) / no <= static_cast<double>(j + 1) / ni;
    if (advance_outer) {
      b.tri(outer.ids[i], outer.ids[(i + 1) % no], inner.ids[j % ni]);
      ++i;
    } else {
      b.tri(outer.ids[i % no], inner.ids[(j + 1) % ni], inner.ids[j]);
      ++j;
    }
  }
}

// Merges two parallel vertex chains (outer[0..], inner[0..]) spanning the
// same trapezoid, always closing the shorter diagonal.
void zip_chains(TriBuilder& b, const std::vector<int>& outer, const std::vector<int>& inner) {
  const std::size_t mo = outer.size() - 1;
  const std::size_t mi = inner.size() - 1;
  std::size_t i = 0, j = 0;
  while (i < mo || j < mi) {
    bool advance_outer;
    if (i == mo) advance_outer = false;
    else if (j == mi) advance_outer = true;
    else {
      double diag_outer = (b.vertices[outer[i + 1]] - b.vertices[inner[j]]).norm();
      double diag_inner = (b.vertices[outer[i]] - b.vertices[inner[j + 1]]).norm();
      advance_outer = diag_outer <= diag_inner;
    }
    if (advance_outer) {
      b.tri(outer[i], outer[i + 1], inner[j]);
      ++i;
    } else {
      b.tri(outer[i], inner[j + 1], inner[j]);
      ++j;
    }
  }
}

struct Layering {
  std::vector<double> offsets;  // distance of each ring from the boundary, offsets[0] = 0
  std::vector<double> widths;   // width of the layer just outside each ring (widths[0] = first width)
};

// Rings marching inward from a boundary until the remaining depth is about
// one layer; the caller closes the core.
Layering one_sided_layers(double depth, double s0, double h) {
  Layering out;
  out.offsets.push_back(0.0);
  out.widths.push_back(s0);
  double s = s0;
  double reached = 0.0;
  while (depth - reached - s >= 0.75 * s) {
    reached += s;
    out.offsets.push_back(reached);
    out.widths.push_back(s);
    s = std::min(h, s * kLayerGrowth);
  }
  return out;
}

// Levels 0 = t_0 < ... < t_N = length, graded from both ends.
std::vector<double> two_sided_levels(double length, double s0, double h) {
  std::vector<double> lo{0.0}, hi{length};
  double a = 0.0, b = length, sa = s0, sb = s0;
  while (b - a >= 1.5 * (sa + sb)) {
    a += sa;
    b -= sb;
    lo.push_back(a);
    hi.push_back(b);
    sa = std::min(h, sa * kLayerGrowth);
    sb = std::min(h, sb * kLayerGrowth);
  }
  double gap = b - a;
  int k = std::max(1, static_cast<int>(std::lround(gap / std::max(sa, sb))));
  for (int i = 1; i < k; ++i) lo.push_back(a + gap * i / k);
  std::vector<double> levels = lo;
  levels.insert(levels.end(), hi.rbegin(), hi.rend());
  return levels;
}

Ring circle_ring(TriBuilder& b, const Vec2& c, double rho, std::size_t n) {
  Ring r;
  for (std::size_t i = 0; i < n; ++i) {
    double th = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    r.ids.push_back(b.add(c + rho * Vec2(std::cos(th), std::sin(th))));
  }
  return r;
}

std::size_t ring_count(double rho, double spacing, std::size_t minimum) {
  return std::max<std::size_t>(minimum, static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi * rho / spacing - 1e-9)));
}

void close_boundary(TriBuilder& b, const Ring& ring, bool reversed) {
  const std::size_t n = ring.ids.size();
  for (std::size_t i = 0; i < n; ++i) {
    int p = ring.ids[i], q = ring.ids[(i + 1) % n];
    b.boundary.push_back({reversed ? std::array<int, 2>{q, p} : std::array<int, 2>{p, q}, NodeTag::Dirichlet, true});
  }
}

TriBuilder mesh_disc(const geometry::Disc& disc, double h, double grading) {
  TriBuilder b;
  Layering layers = one_sided_layers(disc.radius, grading * h, h);
  std::vector<Ring> rings;
  for (std::size_t j = 0; j < layers.offsets.size(); ++j) {
    double rho = disc.radius - layers.offsets[j];
    double spacing = j == 0 ? grading * h : layers.widths[j];
    rings.push_back(circle_ring(b, disc.center, rho, ring_count(rho, spacing, 6)));
  }
  close_boundary(b, rings.front(), false);
  for (std::size_t j = 0; j + 1 < rings.size(); ++j) zip_by_angle(b, rings[j], rings[j + 1]);
  int c = b.add(disc.center);
  const Ring& core = rings.back();
  for (std::size_t i = 0; i < core.ids.size(); ++i) b.tri(c, core.ids[i], core.ids[(i + 1) % core.ids.size()]);
  return b;
}

TriBuilder mesh_annulus(const geometry::Annulus& ann, double h, double grading) {
  TriBuilder b;
  std::vector<double> levels = two_sided_levels(ann.r_out - ann.r_in, grading * h, h);
  std::vector<Ring> rings;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    double rho = ann.r_out - levels[j];
    double spacing;
    if (j == 0 || j + 1 == levels.size()) spacing = grading * h;
    else spacing = std::min(levels[j] - levels[j - 1], levels[j + 1] - levels[j]);
    rings.push_back(circle_ring(b, ann.center, rho, ring_count(rho, spacing, 8)));
  }
  close_boundary(b, rings.front(), false);
  close_boundary(b, rings.back(), true);
  for (std::size_t j = 0; j + 1 < rings.size(); ++j) zip_by_angle(b, rings[j], rings[j + 1]);
  return b;
}

bool is_axis_aligned_rectangle(const geometry::ConvexPolygon& poly) {
  if (poly.vertices.size() != 4) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    Vec2 e = poly.vertices[(i + 1) % 4] - poly.vertices[i];
    if (e.x() != 0.0 && e.y() != 0.0) return false;
  }
  return true;
}

TriBuilder mesh_rectangle_structured(const geometry::ConvexPolygon& poly, double h) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const auto& v : poly.vertices) {
    x0 = std::min(x0, v.x());
    y0 = std::min(y0, v.y());
    x1 = std::max(x1, v.x());
    y1 = std::max(y1, v.y());
  }
  const int nx = std::max(1, static_cast<int>(std::ceil((x1 - x0) / h - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil((y1 - y0) / h - 1e-9)));
  TriBuilder b;
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      double x = i == nx ? x1 : x0 + (x1 - x0) * i / nx;
      double y = j == ny ? y1 : y0 + (y1 - y0) * j / ny;
      b.add(Vec2(x, y));
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      b.tri(id(i, j), id(i + 1, j), id(i + 1, j + 1));
      b.tri(id(i, j), id(i + 1, j + 1), id(i, j + 1));
    }
  std::vector<int> loop;
  for (int i = 0; i < nx; ++i) loop.push_back(id(i, 0));
  for (int j = 0; j < ny; ++j) loop.push_back(id(nx, j));
  for (int i = nx; i > 0; --i) loop.push_back(id(i, ny));
  for (int j = ny; j > 0; --j) loop.push_back(id(0, j));
  close_boundary(b, Ring{loop}, false);
  return b;
}

// Rings homothetic to the polygon about its Chebyshev centre. The first
// interior ring repeats the boundary subdivision so the boundary layer is
// made of trapezoids no thicker than the boundary spacing.
TriBuilder mesh_polygon_rings(const geometry::ConvexPolygon& poly, double h, double grading) {
  const auto& v = poly.vertices;
  const std::size_t K = v.size();
  const Vec2 c = geometry::chebyshev_ball(poly).center;
  double e_max = 0.0;
  std::vector<double> len(K);
  for (std::size_t k = 0; k < K; ++k) {
    Vec2 t = (v[(k + 1) % K] - v[k]).normalized();
    Vec2 n(-t.y(), t.x());
    e_max = std::max(e_max, n.dot(c - v[k]));
    len[k] = (v[(k + 1) % K] - v[k]).norm();
  }
  const double s0 = grading * h;
  Layering layers = one_sided_layers(e_max, s0, h);

  TriBuilder b;
  // sides[j][k] = chain of vertex ids along side k of ring j, corner to corner.
  std::vector<std::vector<std::vector<int>>> sides;
  std::vector<std::size_t> prev_counts(K);
  for (std::size_t j = 0; j < layers.offsets.size(); ++j) {
    double t = 1.0 - layers.offsets[j] / e_max;
    std::vector<Vec2> corners(K);
    for (std::size_t k = 0; k < K; ++k) corners[k] = c + t * (v[k] - c);
    std::vector<int> corner_ids(K);
    for (std::size_t k = 0; k < K; ++k) corner_ids[k] = b.add(corners[k]);
    std::vector<std::vector<int>> ring_sides(K);
    for (std::size_t k = 0; k < K; ++k) {
      std::size_t m;
      if (j == 0) m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len[k] / s0 - 1e-9)));
      else if (j == 1) m = prev_counts[k];
      else m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t * len[k] / layers.widths[j] - 1e-9)));
      prev_counts[k] = m;
      std::vector<int>& chain = ring_sides[k];
      chain.push_back(corner_ids[k]);
      const Vec2& p = corners[k];
      const Vec2& q = corners[(k + 1) % K];
      for (std::size_t i = 1; i < m; ++i) chain.push_back(b.add(p + (q - p) * (static_cast<double>(i) / m)));
      chain.push_back(corner_ids[(k + 1) % K]);
    }
    sides.push_back(std::move(ring_sides));
  }
  std::vector<int> loop;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i + 1 < sides[0][k].size(); ++i) loop.push_back(sides[0][k][i]);
  close_boundary(b, Ring{loop}, false);
  for (std::size_t j = 0; j + 1 < sides.size(); ++j)
    for (std::size_t k = 0; k < K; ++k) zip_chains(b, sides[j][k], sides[j + 1][k]);
  int centre = b.add(c);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& chain = sides.back()[k];
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) b.tri(centre, chain[i], chain[i + 1]);
  }
  return b;
}

void finalize_distances(TriMesh& m) {
  m.distance.assign(m.vertices.size(), 0.0);
  std::vector<char> on_boundary(m.vertices.size(), 0);
  for (const auto& e : m.boundary_edges)
    if (e.on_domain_boundary) on_boundary[e.v[0]] = on_boundary[e.v[1]] = 1;
  for (std::size_t i = 0; i < m.vertices.size(); ++i)
    m.distance[i] = on_boundary[i] ? 0.0 : geometry::boundary_distance(m.domain, as_point(m.vertices[i]));
}

void check_orientation(const TriMesh& m) {
  for (std::size_t t = 0; t < m.triangles.size(); ++t)
    if (!(m.area(t) > 0.0)) {
      std::ostringstream msg;
      msg << "triangle " << t << " has non-positive area " << m.area(t);
      fail(ErrorCode::MeshGenerationFailure, msg.str());
    }
}

Vec2 project_to_boundary(const Domain& domain, const Vec2& p) {
  if (const auto* d = domain.as<geometry::Disc>()) return d->center + d->radius * (p - d->center).normalized();
  if (const auto* a = domain.as<geometry::Annulus>()) {
    double rho = (p - a->center).norm();
    double target = std::abs(rho - a->r_in) < std::abs(rho - a->r_out) ? a->r_in : a->r_out;
    return a->center + target * (p - a->center).normalized();
  }
  return p;
}

} // namespace

std::string to_string(NodeTag tag) {
  switch (tag) {
  case NodeTag::Interior: return "interior";
  case NodeTag::Dirichlet: return "dirichlet";
  case NodeTag::Robin: return "robin";
  }
  return "interior";
}

double TriMesh::area(std::size_t t) const {
  const auto& tr = triangles[t];
  return 0.5 * cross(vertices[tr[1]] - vertices[tr[0]], vertices[tr[2]] - vertices[tr[0]]);
}

double TriMesh::diameter(std::size_t t) const {
  const auto& tr = triangles[t];
  return std::max({(vertices[tr[1]] - vertices[tr[0]]).norm(), (vertices[tr[2]] - vertices[tr[1]]).norm(),
                   (vertices[tr[0]] - vertices[tr[2]]).norm()});
}

double default_grading_1d(int n) {
  int m = n / 2;
  if (m <= 1) return 1.0;
  return std::min(1.0, std::max(0.15, std::pow(1e-12, 1.0 / (m - 1))));
}

Mesh1D build_mesh_1d(const Domain& domain, int n, double grading) {
  const auto* iv = domain.as<geometry::Interval>();
  if (!iv) fail(ErrorCode::InvalidArgument, "build_mesh_1d needs an interval, got " + domain.kind());
  if (n < 2 || n % 2 != 0) fail(ErrorCode::InvalidArgument, "element count must be even and >= 2");
  if (!(grading > 0.0 && grading <= 1.0)) fail(ErrorCode::InvalidGrading, "grading must lie in (0, 1]");
  const int m = n / 2;
  const double half = 0.5 * (iv->b - iv->a);
  const double mid = iv->a + half;

  // Layer k (k = 0 touches the endpoint) has size s1 * g^(m-1-k).
  std::vector<double> pw(m);
  for (int k = 0; k < m; ++k) pw[k] = std::pow(grading, m - 1 - k);
  double total = 0.0;
  for (int k = 0; k < m; ++k) total += pw[k];
  std::vector<double> offset(m + 1, 0.0);
  for (int k = 0; k < m; ++k) offset[k + 1] = offset[k] + half * pw[k] / total;
  offset[m] = half;

  Mesh1D mesh{domain, {}, {}, {}, {}};
  mesh.nodes.reserve(n + 1);
  mesh.distance.reserve(n + 1);
  for (int k = 0; k < m; ++k) {
    mesh.nodes.push_back(iv->a + offset[k]);
    mesh.distance.push_back(offset[k]);
  }
  mesh.nodes.push_back(mid);
  mesh.distance.push_back(half);
  for (int k = m - 1; k >= 0; --k) {
    mesh.nodes.push_back(iv->b - offset[k]);
    mesh.distance.push_back(offset[k]);
  }
  for (int e = 0; e < n; ++e) {
    if (!(mesh.nodes[e + 1] > mesh.nodes[e]) || !(std::abs(mesh.distance[e + 1] - mesh.distance[e]) > 0.0))
      fail(ErrorCode::InvalidGrading, "grading " + std::to_string(grading) + " with n = " + std::to_string(n) +
                                          " produces elements below double precision");
    mesh.elements.push_back({e, e + 1});
  }
  mesh.tags.assign(n + 1, NodeTag::Interior);
  mesh.tags.front() = mesh.tags.back() = NodeTag::Dirichlet;
  return mesh;
}

TriMesh build_trimesh(const Domain& domain, double h, double grading) {
  if (!(grading > 0.0 && grading <= 1.0)) fail(ErrorCode::InvalidGrading, "grading must lie in (0, 1]");
  if (domain.dimension() != 2)
    fail(ErrorCode::MeshGenerationFailure, "triangulation needs a planar domain, got " + domain.kind());
  const double dint = geometry::interior_diameter(domain);
  if (!(h > 0.0 && h < dint / 4.0)) {
    std::ostringstream msg;
    msg << "target size h = " << h << " must satisfy 0 < h < D_int/4 = " << dint / 4.0;
    fail(ErrorCode::MeshGenerationFailure, msg.str());
  }
  TriBuilder b;
  if (const auto* d = domain.as<geometry::Disc>()) b = mesh_disc(*d, h, grading);
  else if (const auto* a = domain.as<geometry::Annulus>()) b = mesh_annulus(*a, h, grading);
  else if (const auto* p = domain.as<geometry::ConvexPolygon>())
    b = (grading == 1.0 && is_axis_aligned_rectangle(*p)) ? mesh_rectangle_structured(*p, h)
                                                         : mesh_polygon_rings(*p, h, grading);
  TriMesh m{domain, CoordinateSystem::Cartesian, std::move(b.vertices), std::move(b.triangles),
            std::move(b.boundary), {}, {}};
  m.tags.assign(m.vertices.size(), NodeTag::Interior);
  for (const auto& e : m.boundary_edges) m.tags[e.v[0]] = m.tags[e.v[1]] = e.tag;
  finalize_distances(m);
  check_orientation(m);
  return m;
}

Mesh1D restrict_to_strip(const Mesh1D& mesh, const StripSpec& strip) {
  const auto* iv = mesh.domain.as<geometry::Interval>();
  if (!iv) fail(ErrorCode::InvalidArgument, "1D strip restriction needs an interval mesh");
  const double length = iv->b - iv->a;
  const double half = 0.5 * length;
  const double tol = 1e-12 * length;
  if (!(strip.delta_out >= 0.0 && strip.delta_in > strip.delta_out))
    fail(ErrorCode::InvalidArgument, "strip needs 0 <= delta_out < delta_in");
  if (strip.delta_in > half + tol) fail(ErrorCode::InvalidArgument, "strip level delta_in exceeds sup d");

  // Node distances, from the mesh when it carries them.
  std::vector<double> dist = mesh.distance;
  if (!mesh.has_distance()) {
    dist.clear();
    for (double x : mesh.nodes) dist.push_back(geometry::boundary_distance(mesh.domain, geometry::point(x)));
  }
  const double din = std::min(strip.delta_in, half);
  const bool whole = std::abs(din - half) <= tol;

  // Each half is walked in the direction of increasing d.
  struct Piece {
    std::vector<int> order;  // node indices on this half, d increasing
    bool left;
  };
  std::vector<int> left, right;
  for (int i = 0; i < static_cast<int>(mesh.nodes.size()); ++i) (mesh.nodes[i] <= iv->a + half ? left : right).push_back(i);
  std::reverse(right.begin(), right.end());
  if (!right.empty() && !left.empty() && left.back() + 1 == right.back() && dist[left.back()] >= half - tol)
    right.push_back(left.back());  // the midpoint node belongs to both halves

  auto local_size = [&](const std::vector<int>& idx, double d) {
    for (std::size_t j = 1; j < idx.size(); ++j)
      if (dist[idx[j]] >= d) return dist[idx[j]] - dist[idx[j - 1]];
    return idx.size() >= 2 ? dist[idx.back()] - dist[idx[idx.size() - 2]] : length;
  };

  struct Node {
    double x, d;
    NodeTag tag;
  };
  auto collect = [&](const std::vector<int>& idx, bool is_left) {
    std::vector<Node> nodes;
    const double lo = strip.delta_out, hi = din;
    const double snap_lo = 0.1 * local_size(idx, lo), snap_hi = 0.1 * local_size(idx, hi);
    auto x_at = [&](double d) { return is_left ? iv->a + d : iv->b - d; };
    NodeTag lo_tag = strip.delta_out > 0.0 ? NodeTag::Dirichlet : mesh.tags[idx.front()];
    nodes.push_back({x_at(lo), lo, lo_tag});
    if (lo == 0.0) nodes.back().x = mesh.nodes[idx.front()];
    for (int i : idx)
      if (dist[i] > lo + snap_lo && dist[i] < hi - snap_hi) nodes.push_back({mesh.nodes[i], dist[i], NodeTag::Interior});
    nodes.push_back({x_at(hi), hi, NodeTag::Dirichlet});
    if (whole) nodes.back().x = iv->a + half;
    if (nodes.size() < 5) {
      std::ostringstream msg;
      msg << "strip (" << strip.delta_out << ", " << strip.delta_in << ") holds " << nodes.size() - 1
          << " element layer(s); at least 4 are required";
      fail(ErrorCode::StripTooThin, msg.str());
    }
    return nodes;
  };
  std::vector<Node> lo_half = collect(left, true), hi_half = collect(right, false);
  std::reverse(hi_half.begin(), hi_half.end());
  if (whole) hi_half.erase(hi_half.begin());  // shared midpoint

  Mesh1D out{mesh.domain, {}, {}, {}, {}};
  auto append = [&](const std::vector<Node>& nodes, bool connect_first) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      out.nodes.push_back(nodes[i].x);
      out.distance.push_back(nodes[i].d);
      out.tags.push_back(nodes[i].tag);
      if (i > 0 || connect_first)
        out.elements.push_back({static_cast<int>(out.nodes.size()) - 2, static_cast<int>(out.nodes.size()) - 1});
    }
  };
  append(lo_half, false);
  append(hi_half, whole);
  return out;
}

TriMesh restrict_to_strip(const TriMesh& mesh, const StripSpec& strip) {
  if (!(strip.delta_out >= 0.0 && strip.delta_in > strip.delta_out))
    fail(ErrorCode::InvalidArgument, "strip needs 0 <= delta_out < delta_in");
  std::vector<int> remap(mesh.vertices.size(), -1);
  TriMesh out{mesh.domain, mesh.coords, {}, {}, {}, {}, {}};
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tr = mesh.triangles[t];
    Vec2 bary = (mesh.vertices[tr[0]] + mesh.vertices[tr[1]] + mesh.vertices[tr[2]]) / 3.0;
    double d = geometry::boundary_distance(mesh.domain, as_point(bary));
    if (!(d > strip.delta_out && d < strip.delta_in)) continue;
    std::array<int, 3> nt;
    for (int k = 0; k < 3; ++k) {
      if (remap[tr[k]] < 0) {
        remap[tr[k]] = static_cast<int>(out.vertices.size());
        out.vertices.push_back(mesh.vertices[tr[k]]);
        out.tags.push_back(mesh.tags[tr[k]]);
        out.distance.push_back(mesh.distance[tr[k]]);
      }
      nt[k] = remap[tr[k]];
    }
    out.triangles.push_back(nt);
  }
  if (out.triangles.empty()) fail(ErrorCode::StripTooThin, "no element barycentre lies in the strip");

  std::map<std::pair<int, int>, const BoundaryEdge*> original;
  for (const auto& e : mesh.boundary_edges) original[edge_key(e.v[0], e.v[1])] = &e;
  std::map<std::pair<int, int>, std::pair<int, std::array<int, 2>>> count;
  std::vector<int> inverse(out.vertices.size());
  for (std::size_t i = 0; i < remap.size(); ++i)
    if (remap[i] >= 0) inverse[remap[i]] = static_cast<int>(i);
  for (const auto& tr : out.triangles)
    for (int k = 0; k < 3; ++k) {
      int a = tr[k], b = tr[(k + 1) % 3];
      auto& entry = count[edge_key(a, b)];
      ++entry.first;
      entry.second = {a, b};
    }
  std::vector<std::vector<int>> adjacency(out.vertices.size());
  for (const auto& [key, entry] : count) {
    adjacency[key.first].push_back(key.second);
    adjacency[key.second].push_back(key.first);
    if (entry.first != 1) continue;
    auto it = original.find(edge_key(inverse[key.first], inverse[key.second]));
    if (it != original.end())
      out.boundary_edges.push_back({entry.second, it->second->tag, it->second->on_domain_boundary});
    else
      out.boundary_edges.push_back({entry.second, NodeTag::Dirichlet, false});
  }
  for (const auto& e : out.boundary_edges)
    if (!e.on_domain_boundary) out.tags[e.v[0]] = out.tags[e.v[1]] = NodeTag::Dirichlet;

  // Layer count: graph distance from the outer side of the strip to the
  // inner interface.
  const double mid_level = 0.5 * (strip.delta_out + strip.delta_in);
  std::vector<int> hops(out.vertices.size(), -1);
  std::vector<char> target(out.vertices.size(), 0);
  std::deque<int> queue;
  for (const auto& e : out.boundary_edges) {
    double level = 0.5 * (out.distance[e.v[0]] + out.distance[e.v[1]]);
    for (int v : e.v) {
      if (level < mid_level) {
        if (hops[v] < 0) {
          hops[v] = 0;
          queue.push_back(v);
        }
      } else {
        target[v] = 1;
      }
    }
  }
  bool any_target = std::any_of(target.begin(), target.end(), [](char c) { return c != 0; });
  if (!queue.empty() && any_target) {
    int layers = -1;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      if (target[v]) {
        layers = hops[v];
        break;
      }
      for (int w : adjacency[v])
        if (hops[w] < 0) {
          hops[w] = hops[v] + 1;
          queue.push_back(w);
        }
    }
    if (layers >= 0 && layers < 4) {
      std::ostringstream msg;
      msg << "strip (" << strip.delta_out << ", " << strip.delta_in << ") resolves only " << layers
          << " element layer(s); at least 4 are required";
      fail(ErrorCode::StripTooThin, msg.str());
    }
  }
  return out;
}

Mesh1D refine_uniform(const Mesh1D& mesh) {
  Mesh1D out{mesh.domain, {}, {}, {}, {}};
  const bool dist = mesh.has_distance();
  std::vector<int> remap(mesh.nodes.size(), -1);
  auto node = [&](int i) {
    if (remap[i] < 0) {
      remap[i] = static_cast<int>(out.nodes.size());
      out.nodes.push_back(mesh.nodes[i]);
      out.tags.push_back(mesh.tags[i]);
      if (dist) out.distance.push_back(mesh.distance[i]);
    }
    return remap[i];
  };
  for (const auto& e : mesh.elements) {
    int a = node(e[0]);
    int m = static_cast<int>(out.nodes.size());
    out.nodes.push_back(0.5 * (mesh.nodes[e[0]] + mesh.nodes[e[1]]));
    out.tags.push_back(NodeTag::Interior);
    if (dist) out.distance.push_back(0.5 * (mesh.distance[e[0]] + mesh.distance[e[1]]));
    int b = node(e[1]);
    out.elements.push_back({a, m});
    out.elements.push_back({m, b});
  }
  return out;
}

TriMesh refine_uniform(const TriMesh& mesh) {
  TriMesh out{mesh.domain, mesh.coords, mesh.vertices, {}, {}, mesh.tags, mesh.distance};
  std::map<std::pair<int, int>, const BoundaryEdge*> boundary;
  for (const auto& e : mesh.boundary_edges) boundary[edge_key(e.v[0], e.v[1])] = &e;
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec2 p = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    NodeTag tag = NodeTag::Interior;
    double d;
    auto be = boundary.find(key);
    if (be != boundary.end()) {
      tag = be->second->tag;
      if (be->second->on_domain_boundary) {
        p = project_to_boundary(mesh.domain, p);
        d = 0.0;
      } else {
        d = geometry::boundary_distance(mesh.domain, as_point(p));
      }
    } else {
      d = geometry::boundary_distance(mesh.domain, as_point(p));
    }
    int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p);
    out.tags.push_back(tag);
    out.distance.push_back(d);
    midpoint.emplace(key, id);
    return id;
  };
  for (const auto& t : mesh.triangles) {
    int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
    out.triangles.push_back({t[0], ab, ca});
    out.triangles.push_back({ab, t[1], bc});
    out.triangles.push_back({ca, bc, t[2]});
    out.triangles.push_back({ab, bc, ca});
  }
  for (const auto& e : mesh.boundary_edges) {
    int m = mid(e.v[0], e.v[1]);
    out.boundary_edges.push_back({{e.v[0], m}, e.tag, e.on_domain_boundary});
    out.boundary_edges.push_back({{m, e.v[1]}, e.tag, e.on_domain_boundary});
  }
  check_orientation(out);
  return out;
}

AxisymmetricReduction axisymmetric_reduce(const Domain& torus, int mode) {
  const auto* t = torus.as<geometry::Torus>();
  if (!t) fail(ErrorCode::NotATorus, "axisymmetric reduction needs a torus, got " + torus.kind());
  if (mode < 0) fail(ErrorCode::InvalidArgument, "azimuthal mode must be >= 0");
  AxisymmetricReduction red{Domain::disc(Vec2(t->c, 0.0), t->R), mode, forms::CoefficientExpr::parse("r"),
                            forms::CoefficientExpr::constant(0.0)};
  if (mode != 0) red.potential = forms::CoefficientExpr::parse(std::to_string(mode * mode) + "/r^2");
  return red;
}

TriMesh build_axisymmetric_mesh(const AxisymmetricReduction& reduction, double h, double grading) {
  TriMesh m = build_trimesh(reduction.cross_section, h, grading);
  m.coords = CoordinateSystem::Axisymmetric;
  return m;
}

MeshStats stats(const Mesh1D& mesh) {
  MeshStats s;
  s.nodes = mesh.num_nodes();
  s.elements = mesh.num_elements();
  s.min_size = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    double l = mesh.element_length(e);
    s.min_size = std::min(s.min_size, l);
    s.max_size = std::max(s.max_size, l);
    s.measure += l;
  }
  double exact = geometry::volume(mesh.domain);
  s.measure_defect = (exact - s.measure) / exact;
  return s;
}

MeshStats stats(const TriMesh& mesh) {
  MeshStats s;
  s.nodes = mesh.num_nodes();
  s.elements = mesh.num_elements();
  s.min_size = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
    double dia = mesh.diameter(t);
    s.min_size = std::min(s.min_size, dia);
    s.max_size = std::max(s.max_size, dia);
    s.measure += mesh.area(t);
  }
  double exact = geometry::volume(mesh.domain);
  s.measure_defect = (exact - s.measure) / exact;
  return s;
}

double max_boundary_element_diameter(const TriMesh& mesh) {
  std::vector<char> on_boundary(mesh.vertices.size(), 0);
  for (const auto& e : mesh.boundary_edges)
    if (e.on_domain_boundary) on_boundary[e.v[0]] = on_boundary[e.v[1]] = 1;
  double best = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tr = mesh.triangles[t];
    if (on_boundary[tr[0]] || on_boundary[tr[1]] || on_boundary[tr[2]]) best = std::max(best, mesh.diameter(t));
  }
  return best;
}

void write_mesh(std::ostream& os, const Mesh1D& mesh) {
  os.precision(17);
  os << "hardylab-mesh 1\n";
  os << "dimension 1 coordinates cartesian\n";
  os << "vertices " << mesh.nodes.size() << "\n";
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    os << mesh.nodes[i] << ' '
       << (mesh.has_distance() ? mesh.distance[i]
                               : geometry::boundary_distance(mesh.domain, geometry::point(mesh.nodes[i])))
       << ' '
       << to_string(mesh.tags[i]) << '\n';
  os << "elements " << mesh.elements.size() << "\n";
  for (const auto& e : mesh.elements) os << e[0] << ' ' << e[1] << '\n';
  os << "boundary 0\n";
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  os.precision(17);
  os << "hardylab-mesh 1\n";
  os << "dimension 2 coordinates "
     << (mesh.coords == CoordinateSystem::Axisymmetric ? "axisymmetric" : "cartesian") << "\n";
  os << "vertices " << mesh.vertices.size() << "\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    os << mesh.vertices[i].x() << ' ' << mesh.vertices[i].y() << ' ' << mesh.distance[i] << ' '
       << to_string(mesh.tags[i]) << '\n';
  os << "elements " << mesh.triangles.size() << "\n";
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "boundary " << mesh.boundary_edges.size() << "\n";
  for (const auto& e : mesh.boundary_edges)
    os << e.v[0] << ' ' << e.v[1] << ' ' << to_string(e.tag) << ' ' << (e.on_domain_boundary ? "domain" : "interface")
       << '\n';
}

const Domain& domain_of(const Mesh& mesh) {
  return std::visit([](const auto& m) -> const Domain& { return m.domain; }, mesh);
}

std::size_t num_nodes(const Mesh& mesh) {
  return std::visit([](const auto& m) { return m.num_nodes(); }, mesh);
}

std::string describe(const Mesh& mesh) {
  std::ostringstream os;
  std::visit(
      [&](const auto& m) {
        MeshStats s = stats(m);
        os << m.domain.kind() << " mesh: " << s.nodes << " nodes, " << s.elements << " elements, size range ["
           << s.min_size << ", " << s.max_size << "]";
      },
      mesh);
  return os.str();
}

} // namespace hardylab::mesh
