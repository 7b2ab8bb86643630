#include "hardylab/forms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

#include "hardylab/errors.hpp"
#include "hardylab/quadrature.hpp"

namespace hardylab::forms {

namespace {

using geometry::Point;
using geometry::Vec2;
using mesh::Mesh1D;
using mesh::NodeTag;
using mesh::TriMesh;

struct QPoint {
  Point x;
  double weight;  // quadrature weight times element measure (times r when axisymmetric)
  std::array<double, 3> phi;
  double d = -1.0;  // distance carried by the mesh, when known
};

struct Element {
  int nn = 0;
  std::array<int, 3> nodes{};
  std::array<Point, 3> grad{};
  double size = 0.0;
  std::vector<QPoint> qps;
};

// Calls f(const Element&) for every element with its quadrature points.
template <class F> void for_each_element(const Mesh1D& m, int order, F&& f) {
  const quadrature::Rule1D rule = quadrature::gauss_legendre(order);
  Element el;
  el.nn = 2;
  el.qps.resize(rule.points.size());
  const bool dist = m.has_distance();
  for (std::size_t k = 0; k < m.elements.size(); ++k) {
    const auto& e = m.elements[k];
    const double x0 = m.nodes[e[0]], x1 = m.nodes[e[1]];
    const double L = m.element_length(k);
    el.nodes = {e[0], e[1], -1};
    el.grad[0] = Point(-1.0 / L, 0.0, 0.0);
    el.grad[1] = Point(1.0 / L, 0.0, 0.0);
    el.size = L;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      double t = rule.points[q];
      el.qps[q] = {Point(x0 + (x1 - x0) * t, 0.0, 0.0), L * rule.weights[q], {1.0 - t, t, 0.0}};
      if (dist) el.qps[q].d = m.distance[e[0]] + t * (m.distance[e[1]] - m.distance[e[0]]);
    }
    f(el);
  }
}

template <class F> void for_each_element(const TriMesh& m, int order, F&& f) {
  const quadrature::TriangleRule rule = quadrature::triangle_rule(order);
  const bool axisymmetric = m.coords == mesh::CoordinateSystem::Axisymmetric;
  Element el;
  el.nn = 3;
  el.qps.resize(rule.points.size());
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tr = m.triangles[t];
    const Vec2& p0 = m.vertices[tr[0]];
    const Vec2& p1 = m.vertices[tr[1]];
    const Vec2& p2 = m.vertices[tr[2]];
    const double area = m.area(t);
    const double inv = 1.0 / (2.0 * area);
    el.nodes = {tr[0], tr[1], tr[2]};
    el.grad[0] = Point((p1.y() - p2.y()) * inv, (p2.x() - p1.x()) * inv, 0.0);
    el.grad[1] = Point((p2.y() - p0.y()) * inv, (p0.x() - p2.x()) * inv, 0.0);
    el.grad[2] = Point((p0.y() - p1.y()) * inv, (p1.x() - p0.x()) * inv, 0.0);
    el.size = m.diameter(t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double xi = rule.points[q][0], eta = rule.points[q][1];
      Vec2 x = p0 + xi * (p1 - p0) + eta * (p2 - p0);
      double w = area * rule.weights[q];
      if (axisymmetric) w *= x.x();
      el.qps[q] = {Point(x.x(), x.y(), 0.0), w, {1.0 - xi - eta, xi, eta}};
    }
    f(el);
  }
}

template <class F> void for_each_element(const mesh::Mesh& m, int order, F&& f) {
  std::visit([&](const auto& mm) { for_each_element(mm, order, f); }, m);
}

int points_per_element(const mesh::Mesh& m, int order) {
  if (std::holds_alternative<Mesh1D>(m)) return order;
  return static_cast<int>(quadrature::triangle_rule(order).points.size());
}

const std::vector<NodeTag>& tags_of(const mesh::Mesh& m) {
  return std::visit([](const auto& mm) -> const std::vector<NodeTag>& { return mm.tags; }, m);
}

void check_order(const QuadratureOptions& quad) {
  if (quad.order < 1) fail(ErrorCode::InvalidArgument, "quadrature order must be >= 1");
}

std::string where(const Point& x) {
  std::ostringstream os;
  os << "(" << x.x() << ", " << x.y() << ")";
  return os.str();
}

EvalContext qp_context(const mesh::Mesh& m, const QPoint& qp) {
  EvalContext ctx = context_at(m, qp.x);
  if (qp.d >= 0.0) ctx.d = qp.d;
  return ctx;
}

double checked_distance(const EvalContext& ctx, const Point& x) {
  if (!(ctx.d > 0.0)) fail(ErrorCode::SingularQuadrature, "quadrature point " + where(x) + " has d = 0");
  return ctx.d;
}

double checked_value(const CoefficientExpr& e, const EvalContext& ctx, const Point& x, const char* what) {
  double v = e.eval(ctx);
  if (!std::isfinite(v))
    fail(ErrorCode::SingularQuadrature, std::string(what) + " '" + e.source() + "' is not finite at " + where(x));
  return v;
}

std::vector<int> build_dof_map(const std::vector<NodeTag>& tags, std::vector<int>& dof_to_node) {
  std::vector<int> node_to_dof(tags.size(), -1);
  for (std::size_t i = 0; i < tags.size(); ++i)
    if (tags[i] != NodeTag::Dirichlet) {
      node_to_dof[i] = static_cast<int>(dof_to_node.size());
      dof_to_node.push_back(static_cast<int>(i));
    }
  return node_to_dof;
}

// Adds the symmetric element block E (nn x nn) into the triplet list.
void scatter(std::vector<Eigen::Triplet<double>>& trip, const Element& el, const std::vector<int>& node_to_dof,
             const double (&E)[3][3]) {
  for (int i = 0; i < el.nn; ++i) {
    int di = node_to_dof[el.nodes[i]];
    if (di < 0) continue;
    for (int j = 0; j < el.nn; ++j) {
      int dj = node_to_dof[el.nodes[j]];
      if (dj < 0) continue;
      trip.emplace_back(di, dj, i <= j ? E[i][j] : E[j][i]);
    }
  }
}

void add_robin(const mesh::Mesh& m, const CoefficientExpr& sigma, const std::vector<int>& node_to_dof,
               std::vector<Eigen::Triplet<double>>& trip) {
  if (const auto* m1 = std::get_if<Mesh1D>(&m)) {
    for (std::size_t i = 0; i < m1->nodes.size(); ++i) {
      if (m1->tags[i] != NodeTag::Robin || node_to_dof[i] < 0) continue;
      Point x(m1->nodes[i], 0.0, 0.0);
      EvalContext ctx = context_at(m, x);
      trip.emplace_back(node_to_dof[i], node_to_dof[i], checked_value(sigma, ctx, x, "sigma"));
    }
    return;
  }
  const auto& m2 = std::get<TriMesh>(m);
  const quadrature::Rule1D g = quadrature::gauss_legendre(2);
  const bool axisymmetric = m2.coords == mesh::CoordinateSystem::Axisymmetric;
  for (const auto& e : m2.boundary_edges) {
    if (e.tag != NodeTag::Robin) continue;
    const Vec2& a = m2.vertices[e.v[0]];
    const Vec2& b = m2.vertices[e.v[1]];
    Vec2 mid = 0.5 * (a + b);
    Point xm(mid.x(), mid.y(), 0.0);
    double s = checked_value(sigma, context_at(m, xm), xm, "sigma");
    double len = (b - a).norm();
    double E[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t q = 0; q < 2; ++q) {
      double t = g.points[q];
      double w = len * g.weights[q] * s;
      if (axisymmetric) w *= a.x() + t * (b.x() - a.x());
      double phi[2] = {1.0 - t, t};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) E[i][j] += w * phi[i] * phi[j];
    }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        int di = node_to_dof[e.v[i]], dj = node_to_dof[e.v[j]];
        if (di >= 0 && dj >= 0) trip.emplace_back(di, dj, E[std::min(i, j)][std::max(i, j)]);
      }
  }
}

SparseMatrix mass_matrix(const mesh::Mesh& m, const CoefficientExpr& weight, int order,
                         const std::vector<int>& node_to_dof, int ndof, bool require_positive) {
  std::vector<Eigen::Triplet<double>> trip;
  for_each_element(m, order, [&](const Element& el) {
    double E[3][3] = {};
    for (const QPoint& qp : el.qps) {
      EvalContext ctx = qp_context(m, qp);
      checked_distance(ctx, qp.x);
      double w = checked_value(weight, ctx, qp.x, "weight");
      if (require_positive && !(w > 0.0))
        fail(ErrorCode::NonpositiveWeight, "weight '" + weight.source() + "' is not positive at " + where(qp.x));
      for (int i = 0; i < el.nn; ++i)
        for (int j = i; j < el.nn; ++j) E[i][j] += qp.weight * w * qp.phi[i] * qp.phi[j];
    }
    scatter(trip, el, node_to_dof, E);
  });
  SparseMatrix M(ndof, ndof);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

} // namespace

FormSpec power_form(double beta, const CoefficientExpr& potential) {
  if (!(beta < 1.0)) fail(ErrorCode::ExponentOutOfRange, "power form needs beta < 1");
  FormSpec f;
  f.diffusion = beta == 0.0 ? CoefficientExpr::constant(1.0) : CoefficientExpr::distance_power(beta);
  f.potential = potential;
  f.beta = beta;
  return f;
}

FormSpec with_mode(FormSpec form, const mesh::AxisymmetricReduction& reduction) {
  if (reduction.mode != 0) form.mode_potential = reduction.potential;
  return form;
}

Eigen::VectorXd Pencil::to_nodes(const Eigen::VectorXd& x) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(node_to_dof.size()));
  for (std::size_t k = 0; k < dof_to_node.size(); ++k) u[dof_to_node[k]] = x[static_cast<Eigen::Index>(k)];
  return u;
}

EvalContext context_at(const mesh::Mesh& m, const Point& p) {
  EvalContext ctx;
  const geometry::Domain& domain = mesh::domain_of(m);
  ctx.d = geometry::boundary_distance(domain, p);
  if (const auto* tm = std::get_if<TriMesh>(&m); tm && tm->coords == mesh::CoordinateSystem::Axisymmetric) {
    ctx.r = p.x();
    ctx.z = p.y();
    ctx.x1 = p.x();
    ctx.x3 = p.y();
  } else {
    ctx.x1 = p.x();
    ctx.x2 = p.y();
    ctx.x3 = p.z();
    ctx.r = std::hypot(p.x(), p.y());
    ctx.z = p.z();
  }
  return ctx;
}

Pencil assemble_pencil(const mesh::Mesh& m, const FormSpec& numerator, const CoefficientExpr& denominator_weight,
                       const QuadratureOptions& quad) {
  check_order(quad);
  Pencil pencil;
  pencil.node_to_dof = build_dof_map(tags_of(m), pencil.dof_to_node);
  const int ndof = static_cast<int>(pencil.dof_to_node.size());
  if (ndof == 0) fail(ErrorCode::InvalidArgument, "mesh has no free degrees of freedom");
  pencil.quadrature_order = quad.order;
  pencil.points_per_element = points_per_element(m, quad.order);

  std::vector<Eigen::Triplet<double>> trip;
  for_each_element(m, quad.order, [&](const Element& el) {
    double E[3][3] = {};
    for (const QPoint& qp : el.qps) {
      EvalContext ctx = qp_context(m, qp);
      checked_distance(ctx, qp.x);
      double a = checked_value(numerator.diffusion, ctx, qp.x, "diffusion");
      if (!(a > 0.0))
        fail(ErrorCode::NonpositiveDiffusion,
             "diffusion '" + numerator.diffusion.source() + "' is not positive at " + where(qp.x));
      double q = checked_value(numerator.potential, ctx, qp.x, "potential");
      if (numerator.mode_potential) q += a * checked_value(*numerator.mode_potential, ctx, qp.x, "mode potential");
      for (int i = 0; i < el.nn; ++i)
        for (int j = i; j < el.nn; ++j)
          E[i][j] += qp.weight * (a * el.grad[i].dot(el.grad[j]) + q * qp.phi[i] * qp.phi[j]);
    }
    scatter(trip, el, pencil.node_to_dof, E);
  });
  add_robin(m, numerator.sigma, pencil.node_to_dof, trip);
  pencil.K.resize(ndof, ndof);
  pencil.K.setFromTriplets(trip.begin(), trip.end());
  pencil.M = mass_matrix(m, denominator_weight, quad.order, pencil.node_to_dof, ndof, true);
  return pencil;
}

SparseMatrix assemble_mass(const mesh::Mesh& m, const CoefficientExpr& weight, const QuadratureOptions& quad,
                           bool require_positive) {
  check_order(quad);
  std::vector<int> dof_to_node;
  std::vector<int> node_to_dof = build_dof_map(tags_of(m), dof_to_node);
  return mass_matrix(m, weight, quad.order, node_to_dof, static_cast<int>(dof_to_node.size()), require_positive);
}

void export_coordinate(std::ostream& os, const SparseMatrix& matrix) {
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> entries;
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) entries.emplace_back(it.row(), it.col(), it.value());
  std::sort(entries.begin(), entries.end());
  char buf[64];
  os << matrix.rows() << ' ' << matrix.cols() << ' ' << entries.size() << '\n';
  for (const auto& [r, c, v] : entries) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << r << ' ' << c << ' ' << buf << '\n';
  }
}

void export_pencil(std::ostream& os, const Pencil& pencil) {
  os << "K\n";
  export_coordinate(os, pencil.K);
  os << "M\n";
  export_coordinate(os, pencil.M);
}

ProfileValue ims_profile(const geometry::Domain& domain, double delta_in, double delta_out, const Point& p) {
  ProfileValue v;
  const double d = geometry::boundary_distance(domain, p);
  const double width = delta_out - delta_in;
  const double t = (d - delta_in) / width;
  if (t <= 0.0) return v;
  if (t >= 1.0) {
    v.phi1 = 0.0;
    v.phi2 = 1.0;
    return v;
  }
  const double s = t * t * (3.0 - 2.0 * t);
  const double ds = 6.0 * t * (1.0 - t) / width;
  const double theta = 0.5 * std::numbers::pi * s;
  v.phi1 = std::cos(theta);
  v.phi2 = std::sin(theta);
  Point grad_d = geometry::distance_calculus(domain, p, geometry::default_fd_step(domain)).grad;
  const double dtheta = 0.5 * std::numbers::pi * ds;
  v.grad_phi1 = -v.phi2 * dtheta * grad_d;
  v.grad_phi2 = v.phi1 * dtheta * grad_d;
  return v;
}

IMSPartition ims_partition(const mesh::Mesh& m, double delta_in, double delta_out) {
  if (!(delta_in > 0.0 && delta_out > delta_in))
    fail(ErrorCode::InvalidArgument, "IMS band needs 0 < delta_in < delta_out");
  const geometry::Domain& domain = mesh::domain_of(m);
  std::vector<Point> pts;
  std::vector<double> dist;
  if (const auto* m1 = std::get_if<Mesh1D>(&m)) {
    for (std::size_t i = 0; i < m1->nodes.size(); ++i) {
      pts.emplace_back(m1->nodes[i], 0.0, 0.0);
      dist.push_back(m1->has_distance() ? m1->distance[i] : geometry::boundary_distance(domain, pts.back()));
    }
  } else {
    const auto& m2 = std::get<TriMesh>(m);
    for (std::size_t i = 0; i < m2.vertices.size(); ++i) {
      pts.emplace_back(m2.vertices[i].x(), m2.vertices[i].y(), 0.0);
      dist.push_back(m2.distance[i]);
    }
  }
  double local = 0.0;
  for_each_element(m, 1, [&](const Element& el) {
    double lo = dist[el.nodes[0]], hi = lo;
    for (int i = 1; i < el.nn; ++i) {
      lo = std::min(lo, dist[el.nodes[i]]);
      hi = std::max(hi, dist[el.nodes[i]]);
    }
    if (hi > delta_in && lo < delta_out) local = std::max(local, el.size);
  });
  if (delta_out - delta_in < 4.0 * local) {
    std::ostringstream msg;
    msg << "IMS band width " << delta_out - delta_in << " is below four local element sizes (" << 4.0 * local << ")";
    fail(ErrorCode::DegenerateBand, msg.str());
  }
  IMSPartition part;
  part.delta_in = delta_in;
  part.delta_out = delta_out;
  for (const Point& p : pts) {
    ProfileValue v = ims_profile(domain, delta_in, delta_out, p);
    part.phi1.push_back(v.phi1);
    part.phi2.push_back(v.phi2);
    part.grad_phi1.push_back(v.grad_phi1);
    part.grad_phi2.push_back(v.grad_phi2);
  }
  return part;
}

double ims_identity_residual(const mesh::Mesh& m, const IMSPartition& partition, const Eigen::VectorXd& u,
                             const CoefficientExpr& a) {
  const geometry::Domain& domain = mesh::domain_of(m);
  if (static_cast<std::size_t>(u.size()) != mesh::num_nodes(m))
    fail(ErrorCode::InvalidArgument, "node vector length does not match the mesh");
  double worst = 0.0;
  for_each_element(m, 4, [&](const Element& el) {
    Point grad_u = Point::Zero();
    for (int i = 0; i < el.nn; ++i) grad_u += u[el.nodes[i]] * el.grad[i];
    for (const QPoint& qp : el.qps) {
      double uq = 0.0;
      for (int i = 0; i < el.nn; ++i) uq += u[el.nodes[i]] * qp.phi[i];
      double av = a.eval(qp_context(m, qp));
      ProfileValue pv = ims_profile(domain, partition.delta_in, partition.delta_out, qp.x);
      double total = 0.0;
      for (int j = 0; j < 2; ++j) {
        double phi = j == 0 ? pv.phi1 : pv.phi2;
        const Point& g = j == 0 ? pv.grad_phi1 : pv.grad_phi2;
        Point grad_phiu = phi * grad_u + uq * g;
        double lhs = av * grad_phiu.squaredNorm();
        double rhs = phi * phi * av * grad_u.squaredNorm() + av * g.squaredNorm() * uq * uq +
                     av * (2.0 * phi * g).dot(uq * grad_u);
        total += std::abs(lhs - rhs);
      }
      worst = std::max(worst, total);
    }
  });
  return worst;
}

} // namespace hardylab::forms
