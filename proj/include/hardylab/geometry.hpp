#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace hardylab::geometry {

using Vec2 = Eigen::Vector2d;
/// Points are always carried in three components; unused trailing
/// coordinates are zero (x for intervals, (x, y) for planar domains).
using Point = Eigen::Vector3d;

inline Point point(double x, double y = 0.0, double z = 0.0) { return Point(x, y, z); }

struct Interval {
  double a = 0.0;
  double b = 1.0;
};

/// Vertices in counterclockwise order.
struct ConvexPolygon {
  std::vector<Vec2> vertices;
};

struct Disc {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
};

struct Annulus {
  Vec2 center = Vec2::Zero();
  double r_in = 0.5;
  double r_out = 1.0;
};

/// Solid torus of revolution about the z axis: the disc of radius R centred
/// at distance c from the axis, swept around it.
struct Torus {
  double c = 3.0;
  double R = 1.0;
};

class Domain {
public:
  using Shape = std::variant<Interval, ConvexPolygon, Disc, Annulus, Torus>;

  /// Validates the shape invariants; throws InvalidDomain.
  explicit Domain(Shape shape);

  static Domain interval(double a, double b) { return Domain(Interval{a, b}); }
  static Domain polygon(std::vector<Vec2> vertices) { return Domain(ConvexPolygon{std::move(vertices)}); }
  static Domain rectangle(double x0, double y0, double x1, double y1);
  static Domain disc(Vec2 center, double radius) { return Domain(Disc{center, radius}); }
  static Domain annulus(Vec2 center, double r_in, double r_out) { return Domain(Annulus{center, r_in, r_out}); }
  static Domain torus(double c, double R) { return Domain(Torus{c, R}); }

  const Shape& shape() const noexcept { return shape_; }
  template <class T> const T* as() const noexcept { return std::get_if<T>(&shape_); }

  int dimension() const noexcept;
  std::string kind() const;
  bool is_convex() const noexcept;
  /// Curved boundary pieces are approximated by polygons when meshed.
  bool has_curved_boundary() const noexcept;

private:
  Shape shape_;
};

/// Positive inside, zero on the boundary, negative outside.
double signed_distance(const Domain& domain, const Point& p);
/// Unsigned distance to the boundary set, defined for any point.
double boundary_distance(const Domain& domain, const Point& p);
bool contains(const Domain& domain, const Point& p, double tol = 0.0);
/// Euclidean distance from p to the boundary; p must lie in the closed domain.
double distance(const Domain& domain, const Point& p);

/// Membership slack used by distance(); scales with the domain size.
double membership_tolerance(const Domain& domain);

enum class Provenance { Analytic, FiniteDifference };
enum class CalculusMethod { Auto, FiniteDifference };

struct DistanceEval {
  double d = 0.0;
  Point grad = Point::Zero();
  double neg_laplacian = 0.0;
  Provenance provenance = Provenance::Analytic;
  /// Nearest boundary point not unique (medial axis); grad and Laplacian
  /// are then one-sided values of a single boundary feature.
  bool near_ridge = false;
};

/// Gradient and -Laplacian of d. Closed forms are used for every supported
/// variant unless a finite-difference evaluation is requested; the
/// finite-difference route needs d(p) > 2h.
DistanceEval distance_calculus(const Domain& domain, const Point& p, double h,
                               CalculusMethod method = CalculusMethod::Auto);

double default_fd_step(const Domain& domain);

/// 2 sup d.
double interior_diameter(const Domain& domain);
/// Usual diameter sup |x - y|.
double diameter(const Domain& domain);
/// Lebesgue measure in the domain's own dimension.
double volume(const Domain& domain);

struct ChebyshevBall {
  Vec2 center;
  double radius;
};

/// Largest inscribed disc, by exhaustive vertex enumeration of the
/// half-plane linear program. The centre is the mean of all optimal
/// vertices, so symmetric polygons get their symmetric centre.
ChebyshevBall chebyshev_ball(const ConvexPolygon& polygon);

struct ScanRegion {
  enum class Kind {
    Full,             // all of the closed domain
    Tubular,          // {d < delta}, scanning -Laplacian of d itself
    TubularIntrinsic, // {d < delta}, scanning the strip's own distance function
  };
  Kind kind = Kind::Full;
  double delta = 0.0;

  static ScanRegion full() { return {}; }
  static ScanRegion tubular(double delta) { return {Kind::Tubular, delta}; }
  static ScanRegion tubular_intrinsic(double delta) { return {Kind::TubularIntrinsic, delta}; }
};

enum class Verdict { Pass, Fail };

struct SuperharmonicityReport {
  double min_value = 0.0;
  Point argmin = Point::Zero();
  Verdict verdict = Verdict::Pass;
  int resolution = 0;
  double tolerance = 0.0;
  std::size_t points_evaluated = 0;
  std::size_t points_excluded = 0;
};

inline constexpr double kSuperharmonicTolerance = 1e-6;

/// Minimum of -Laplacian(d) on a uniform (resolution + 1)^dim grid over the
/// bounding box, restricted to the region. Torus grids live in the (r, z)
/// half-plane. Ridge points are skipped.
SuperharmonicityReport superharmonicity_scan(const Domain& domain, const ScanRegion& region,
                                             int resolution);

std::string to_string(Verdict v);

} // namespace hardylab::geometry
