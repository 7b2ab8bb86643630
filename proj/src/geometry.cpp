#include "hardylab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "hardylab/errors.hpp"

namespace hardylab::geometry {

namespace {

constexpr double kRidgeTolerance = 1e-9;

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

double cross(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

Vec2 inward_normal(const Vec2& from, const Vec2& to) {
  Vec2 t = (to - from).normalized();
  return Vec2(-t.y(), t.x());
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + s * ab)).norm();
}

void validate(const Interval& s) {
  if (!(s.a < s.b) || !std::isfinite(s.a) || !std::isfinite(s.b))
    fail(ErrorCode::InvalidDomain, "interval requires a < b");
}

void validate(const ConvexPolygon& s) {
  const auto& v = s.vertices;
  if (v.size() < 3) fail(ErrorCode::InvalidDomain, "polygon needs at least 3 vertices");
  double area2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& p0 = v[i];
    const Vec2& p1 = v[(i + 1) % v.size()];
    const Vec2& p2 = v[(i + 2) % v.size()];
    if ((p1 - p0).norm() == 0.0) fail(ErrorCode::InvalidDomain, "polygon has repeated vertices");
    if (cross(p1 - p0, p2 - p1) < 0.0)
      fail(ErrorCode::InvalidDomain, "polygon must be convex and counterclockwise");
    area2 += cross(p0, p1);
  }
  if (area2 <= 0.0) fail(ErrorCode::InvalidDomain, "polygon must be counterclockwise with positive area");
}

void validate(const Disc& s) {
  if (!(s.radius > 0.0)) fail(ErrorCode::InvalidDomain, "disc radius must be positive");
}

void validate(const Annulus& s) {
  if (!(0.0 < s.r_in && s.r_in < s.r_out)) fail(ErrorCode::InvalidDomain, "annulus requires 0 < r_in < r_out");
}

void validate(const Torus& s) {
  if (!(0.0 < s.R && s.R < s.c)) fail(ErrorCode::InvalidDomain, "torus requires 0 < R < c");
}

struct PolygonNearest {
  double d;
  std::size_t edge;
  double second;
};

// Signed distance to the edge lines; for interior points of a convex polygon
// the smallest of these is the boundary distance.
PolygonNearest polygon_nearest(const ConvexPolygon& poly, const Vec2& p) {
  const auto& v = poly.vertices;
  PolygonNearest best{std::numeric_limits<double>::infinity(), 0,
                      std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < v.size(); ++i) {
    double s = inward_normal(v[i], v[(i + 1) % v.size()]).dot(p - v[i]);
    if (s < best.d) {
      best.second = best.d;
      best.d = s;
      best.edge = i;
    } else if (s < best.second) {
      best.second = s;
    }
  }
  return best;
}

double cylinder_radius(const Point& p) { return std::hypot(p.x(), p.y()); }

DistanceEval finite_difference_calculus(const Domain& domain, const Point& p, double h) {
  if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  DistanceEval out;
  out.d = signed_distance(domain, p);
  if (out.d <= 2.0 * h) {
    std::ostringstream msg;
    msg << "d(p) = " << out.d << " <= 2h = " << 2.0 * h;
    fail(ErrorCode::TooCloseToBoundary, msg.str());
  }
  const int dim = domain.dimension();
  double lap = 0.0;
  for (int i = 0; i < dim; ++i) {
    Point e = Point::Zero();
    e[i] = h;
    double fp = signed_distance(domain, p + e);
    double fm = signed_distance(domain, p - e);
    out.grad[i] = (fp - fm) / (2.0 * h);
    lap += (fp - 2.0 * out.d + fm) / (h * h);
  }
  out.neg_laplacian = -lap;
  out.provenance = Provenance::FiniteDifference;
  return out;
}

DistanceEval analytic_calculus(const Domain& domain, const Point& p) {
  DistanceEval out;
  out.provenance = Provenance::Analytic;
  std::visit(
      overloaded{
          [&](const Interval& s) {
            double left = p.x() - s.a;
            double right = s.b - p.x();
            out.d = std::min(left, right);
            out.grad = point(left <= right ? 1.0 : -1.0);
            out.neg_laplacian = 0.0;
            out.near_ridge = std::abs(left - right) <= kRidgeTolerance;
          },
          [&](const ConvexPolygon& s) {
            Vec2 q(p.x(), p.y());
            PolygonNearest n = polygon_nearest(s, q);
            const auto& v = s.vertices;
            Vec2 nrm = inward_normal(v[n.edge], v[(n.edge + 1) % v.size()]);
            out.d = n.d;
            out.grad = point(nrm.x(), nrm.y());
            out.neg_laplacian = 0.0;
            out.near_ridge = n.second - n.d <= kRidgeTolerance;
          },
          [&](const Disc& s) {
            Vec2 rel = Vec2(p.x(), p.y()) - s.center;
            double rho = rel.norm();
            out.d = s.radius - rho;
            if (rho <= kRidgeTolerance) {
              out.near_ridge = true;
              out.grad = Point::Zero();
              out.neg_laplacian = std::numeric_limits<double>::infinity();
              return;
            }
            Vec2 g = -rel / rho;
            out.grad = point(g.x(), g.y());
            out.neg_laplacian = 1.0 / rho;
          },
          [&](const Annulus& s) {
            Vec2 rel = Vec2(p.x(), p.y()) - s.center;
            double rho = rel.norm();
            double inner = rho - s.r_in;
            double outer = s.r_out - rho;
            Vec2 radial = rel / rho;
            if (inner <= outer) {
              out.d = inner;
              out.grad = point(radial.x(), radial.y());
              out.neg_laplacian = -1.0 / rho;
            } else {
              out.d = outer;
              out.grad = point(-radial.x(), -radial.y());
              out.neg_laplacian = 1.0 / rho;
            }
            out.near_ridge = std::abs(inner - outer) <= kRidgeTolerance;
          },
          [&](const Torus& s) {
            double r = cylinder_radius(p);
            double dr = r - s.c;
            double rho = std::hypot(dr, p.z());
            out.d = s.R - rho;
            if (rho <= kRidgeTolerance) {
              out.near_ridge = true;
              out.grad = Point::Zero();
              out.neg_laplacian = std::numeric_limits<double>::infinity();
              return;
            }
            // grad rho = ((r - c)/rho) e_r + (z/rho) e_z, and in cylindrical
            // coordinates Laplacian(rho) = rho_rr + rho_r / r + rho_zz
            // = 1/rho + (r - c)/(r rho) = (2r - c)/(r rho).
            out.grad = -point(dr / rho * p.x() / r, dr / rho * p.y() / r, p.z() / rho);
            out.neg_laplacian = (2.0 * r - s.c) / (r * rho);
          },
      },
      domain.shape());
  return out;
}

} // namespace

Domain::Domain(Shape shape) : shape_(std::move(shape)) {
  std::visit([](const auto& s) { validate(s); }, shape_);
}

Domain Domain::rectangle(double x0, double y0, double x1, double y1) {
  return polygon({Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)});
}

int Domain::dimension() const noexcept {
  return std::visit(overloaded{
                        [](const Interval&) { return 1; },
                        [](const Torus&) { return 3; },
                        [](const auto&) { return 2; },
                    },
                    shape_);
}

std::string Domain::kind() const {
  return std::visit(overloaded{
                        [](const Interval&) { return std::string("interval"); },
                        [](const ConvexPolygon&) { return std::string("polygon"); },
                        [](const Disc&) { return std::string("disc"); },
                        [](const Annulus&) { return std::string("annulus"); },
                        [](const Torus&) { return std::string("torus"); },
                    },
                    shape_);
}

bool Domain::is_convex() const noexcept {
  return !std::holds_alternative<Annulus>(shape_) && !std::holds_alternative<Torus>(shape_);
}

bool Domain::has_curved_boundary() const noexcept {
  return std::holds_alternative<Disc>(shape_) || std::holds_alternative<Annulus>(shape_) ||
         std::holds_alternative<Torus>(shape_);
}

double signed_distance(const Domain& domain, const Point& p) {
  return std::visit(
      overloaded{
          [&](const Interval& s) { return std::min(p.x() - s.a, s.b - p.x()); },
          [&](const ConvexPolygon& s) {
            Vec2 q(p.x(), p.y());
            double inside = polygon_nearest(s, q).d;
            if (inside >= 0.0) return inside;
            double out = std::numeric_limits<double>::infinity();
            const auto& v = s.vertices;
            for (std::size_t i = 0; i < v.size(); ++i)
              out = std::min(out, segment_distance(q, v[i], v[(i + 1) % v.size()]));
            return -out;
          },
          [&](const Disc& s) { return s.radius - (Vec2(p.x(), p.y()) - s.center).norm(); },
          [&](const Annulus& s) {
            double rho = (Vec2(p.x(), p.y()) - s.center).norm();
            return std::min(rho - s.r_in, s.r_out - rho);
          },
          [&](const Torus& s) { return s.R - std::hypot(cylinder_radius(p) - s.c, p.z()); },
      },
      domain.shape());
}

double boundary_distance(const Domain& domain, const Point& p) {
  return std::visit(
      overloaded{
          [&](const Interval& s) { return std::min(std::abs(p.x() - s.a), std::abs(s.b - p.x())); },
          [&](const ConvexPolygon& s) {
            Vec2 q(p.x(), p.y());
            double out = std::numeric_limits<double>::infinity();
            const auto& v = s.vertices;
            for (std::size_t i = 0; i < v.size(); ++i)
              out = std::min(out, segment_distance(q, v[i], v[(i + 1) % v.size()]));
            return out;
          },
          [&](const Disc& s) { return std::abs(s.radius - (Vec2(p.x(), p.y()) - s.center).norm()); },
          [&](const Annulus& s) {
            double rho = (Vec2(p.x(), p.y()) - s.center).norm();
            return std::min(std::abs(rho - s.r_in), std::abs(s.r_out - rho));
          },
          [&](const Torus& s) { return std::abs(s.R - std::hypot(cylinder_radius(p) - s.c, p.z())); },
      },
      domain.shape());
}

double membership_tolerance(const Domain& domain) { return 1e-12 * std::max(1.0, diameter(domain)); }

bool contains(const Domain& domain, const Point& p, double tol) { return signed_distance(domain, p) >= -tol; }

double distance(const Domain& domain, const Point& p) {
  double s = signed_distance(domain, p);
  if (s < -membership_tolerance(domain)) {
    std::ostringstream msg;
    msg << "point (" << p.x() << ", " << p.y() << ", " << p.z() << ") lies outside the " << domain.kind()
        << " (signed distance " << s << ")";
    fail(ErrorCode::PointOutsideDomain, msg.str());
  }
  return std::max(0.0, s);
}

DistanceEval distance_calculus(const Domain& domain, const Point& p, double h, CalculusMethod method) {
  (void)distance(domain, p);
  if (method == CalculusMethod::FiniteDifference) {
    DistanceEval fd = finite_difference_calculus(domain, p, h);
    fd.near_ridge = analytic_calculus(domain, p).near_ridge;
    return fd;
  }
  return analytic_calculus(domain, p);
}

double default_fd_step(const Domain& domain) { return 1e-4 * interior_diameter(domain); }

ChebyshevBall chebyshev_ball(const ConvexPolygon& polygon) {
  const auto& v = polygon.vertices;
  const std::size_t m = v.size();
  std::vector<Vec2> normals(m);
  std::vector<double> offsets(m);
  for (std::size_t i = 0; i < m; ++i) {
    normals[i] = inward_normal(v[i], v[(i + 1) % m]);
    offsets[i] = normals[i].dot(v[i]);
  }
  // maximise t subject to n_i . x - t >= n_i . v_i; the optimum sits at a
  // vertex of the feasible set in (x, y, t), i.e. three active constraints.
  double best = -std::numeric_limits<double>::infinity();
  std::vector<Vec2> optimal;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (std::size_t k = j + 1; k < m; ++k) {
        Eigen::Matrix3d A;
        A << normals[i].x(), normals[i].y(), -1.0, normals[j].x(), normals[j].y(), -1.0, normals[k].x(),
            normals[k].y(), -1.0;
        Eigen::Vector3d rhs(offsets[i], offsets[j], offsets[k]);
        Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
        if (!lu.isInvertible()) continue;
        Eigen::Vector3d sol = lu.solve(rhs);
        Vec2 x(sol[0], sol[1]);
        double t = sol[2];
        bool feasible = true;
        for (std::size_t q = 0; q < m && feasible; ++q)
          feasible = normals[q].dot(x) - t >= offsets[q] - 1e-12 * (1.0 + std::abs(offsets[q]));
        if (!feasible) continue;
        if (optimal.empty() || t > best + 1e-12 * (1.0 + std::abs(best))) {
          best = t;
          optimal.assign(1, x);
        } else if (std::abs(t - best) <= 1e-12 * (1.0 + std::abs(best))) {
          optimal.push_back(x);
        }
      }
  if (optimal.empty()) fail(ErrorCode::InvalidDomain, "Chebyshev-centre linear program has no vertex");
  Vec2 c = Vec2::Zero();
  for (const auto& x : optimal) c += x;
  c /= static_cast<double>(optimal.size());
  return {c, best};
}

double interior_diameter(const Domain& domain) {
  return std::visit(overloaded{
                        [](const Interval& s) { return s.b - s.a; },
                        [](const ConvexPolygon& s) { return 2.0 * chebyshev_ball(s).radius; },
                        [](const Disc& s) { return 2.0 * s.radius; },
                        [](const Annulus& s) { return s.r_out - s.r_in; },
                        [](const Torus& s) { return 2.0 * s.R; },
                    },
                    domain.shape());
}

double diameter(const Domain& domain) {
  return std::visit(overloaded{
                        [](const Interval& s) { return s.b - s.a; },
                        [](const ConvexPolygon& s) {
                          double best = 0.0;
                          for (const auto& p : s.vertices)
                            for (const auto& q : s.vertices) best = std::max(best, (p - q).norm());
                          return best;
                        },
                        [](const Disc& s) { return 2.0 * s.radius; },
                        [](const Annulus& s) { return 2.0 * s.r_out; },
                        [](const Torus& s) { return 2.0 * (s.c + s.R); },
                    },
                    domain.shape());
}

double volume(const Domain& domain) {
  using std::numbers::pi;
  return std::visit(overloaded{
                        [](const Interval& s) { return s.b - s.a; },
                        [](const ConvexPolygon& s) {
                          double a2 = 0.0;
                          for (std::size_t i = 0; i < s.vertices.size(); ++i)
                            a2 += cross(s.vertices[i], s.vertices[(i + 1) % s.vertices.size()]);
                          return 0.5 * a2;
                        },
                        [](const Disc& s) { return pi * s.radius * s.radius; },
                        [](const Annulus& s) { return pi * (s.r_out * s.r_out - s.r_in * s.r_in); },
                        [](const Torus& s) { return 2.0 * pi * pi * s.c * s.R * s.R; },
                    },
                    domain.shape());
}

std::string to_string(Verdict v) { return v == Verdict::Pass ? "PASS" : "FAIL"; }

SuperharmonicityReport superharmonicity_scan(const Domain& domain, const ScanRegion& region, int resolution) {
  if (resolution < 8) fail(ErrorCode::InvalidArgument, "scan resolution must be at least 8");
  if (region.kind != ScanRegion::Kind::Full && !(region.delta > 0.0))
    fail(ErrorCode::InvalidArgument, "tubular scan needs delta > 0");

  // Grid axes: the bounding box of the domain, or of the (r, z) cross-section
  // for the torus.
  double lo[2] = {0.0, 0.0};
  double hi[2] = {0.0, 0.0};
  int axes = 2;
  std::visit(overloaded{
                 [&](const Interval& s) {
                   lo[0] = s.a;
                   hi[0] = s.b;
                   axes = 1;
                 },
                 [&](const ConvexPolygon& s) {
                   lo[0] = lo[1] = std::numeric_limits<double>::infinity();
                   hi[0] = hi[1] = -std::numeric_limits<double>::infinity();
                   for (const auto& v : s.vertices)
                     for (int k = 0; k < 2; ++k) {
                       lo[k] = std::min(lo[k], v[k]);
                       hi[k] = std::max(hi[k], v[k]);
                     }
                 },
                 [&](const Disc& s) {
                   for (int k = 0; k < 2; ++k) {
                     lo[k] = s.center[k] - s.radius;
                     hi[k] = s.center[k] + s.radius;
                   }
                 },
                 [&](const Annulus& s) {
                   for (int k = 0; k < 2; ++k) {
                     lo[k] = s.center[k] - s.r_out;
                     hi[k] = s.center[k] + s.r_out;
                   }
                 },
                 [&](const Torus& s) {
                   lo[0] = s.c - s.R;
                   hi[0] = s.c + s.R;
                   lo[1] = -s.R;
                   hi[1] = s.R;
                 },
             },
             domain.shape());
  const bool torus = std::holds_alternative<Torus>(domain.shape());
  const double tol = membership_tolerance(domain);

  SuperharmonicityReport report;
  report.resolution = resolution;
  report.tolerance = kSuperharmonicTolerance;
  report.min_value = std::numeric_limits<double>::infinity();

  const int n1 = resolution + 1;
  const int n2 = axes == 2 ? resolution + 1 : 1;
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      double u = lo[0] + (hi[0] - lo[0]) * i / resolution;
      double w = axes == 2 ? lo[1] + (hi[1] - lo[1]) * j / resolution : 0.0;
      Point p = axes == 1 ? point(u) : (torus ? point(u, 0.0, w) : point(u, w));
      double sd = signed_distance(domain, p);
      if (sd < -tol) continue;
      double d = std::max(sd, 0.0);
      double value = 0.0;
      switch (region.kind) {
      case ScanRegion::Kind::Full: break;
      case ScanRegion::Kind::Tubular:
        if (d >= region.delta) continue;
        break;
      case ScanRegion::Kind::TubularIntrinsic:
        if (d >= region.delta) continue;
        break;
      }
      DistanceEval e = analytic_calculus(domain, p);
      bool ridge = e.near_ridge;
      value = e.neg_laplacian;
      if (region.kind == ScanRegion::Kind::TubularIntrinsic) {
        // The strip's own distance is d below delta/2 and delta - d above,
        // with a ridge on the level set d = delta/2.
        double half = 0.5 * region.delta;
        if (std::abs(d - half) <= kRidgeTolerance) ridge = true;
        if (d > half) value = -value;
      }
      if (ridge) {
        ++report.points_excluded;
        continue;
      }
      ++report.points_evaluated;
      if (value < report.min_value) {
        report.min_value = value;
        report.argmin = p;
      }
    }
  }
  if (report.points_evaluated == 0) fail(ErrorCode::EmptyRegion, "no scan grid point lies in the region");
  report.verdict = report.min_value >= -kSuperharmonicTolerance ? Verdict::Pass : Verdict::Fail;
  return report;
}

} // namespace hardylab::geometry
