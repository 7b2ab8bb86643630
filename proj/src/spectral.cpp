#include "hardylab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "hardylab/errors.hpp"
#include "hardylab/hardy.hpp"

namespace hardylab::spectral {

namespace {

using geometry::Point;

double radical_inverse(std::size_t i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

struct Box {
  Point lo, hi;
  bool torus = false;
};

Box sampling_box(const Domain& domain) {
  Box b;
  if (const auto* iv = domain.as<geometry::Interval>()) {
    b.lo = Point(iv->a, 0, 0);
    b.hi = Point(iv->b, 0, 0);
  } else if (const auto* p = domain.as<geometry::ConvexPolygon>()) {
    b.lo = Point(p->vertices[0].x(), p->vertices[0].y(), 0);
    b.hi = b.lo;
    for (const auto& v : p->vertices) {
      b.lo = b.lo.cwiseMin(Point(v.x(), v.y(), 0));
      b.hi = b.hi.cwiseMax(Point(v.x(), v.y(), 0));
    }
  } else if (const auto* d = domain.as<geometry::Disc>()) {
    b.lo = Point(d->center.x() - d->radius, d->center.y() - d->radius, 0);
    b.hi = Point(d->center.x() + d->radius, d->center.y() + d->radius, 0);
  } else if (const auto* a = domain.as<geometry::Annulus>()) {
    b.lo = Point(a->center.x() - a->r_out, a->center.y() - a->r_out, 0);
    b.hi = Point(a->center.x() + a->r_out, a->center.y() + a->r_out, 0);
  } else if (const auto* t = domain.as<geometry::Torus>()) {
    // (r, z) half-plane, embedded as (r, 0, z)
    b.lo = Point(t->c - t->R, 0, -t->R);
    b.hi = Point(t->c + t->R, 0, t->R);
    b.torus = true;
  }
  return b;
}

// Low-discrepancy points of {0 < d < delta}.
std::vector<Point> strip_sample(const Domain& domain, double delta, std::size_t count) {
  const Box box = sampling_box(domain);
  const int dim = domain.dimension() == 1 ? 1 : 2;
  std::vector<Point> pts;
  const std::size_t max_attempts = 1000 * count + 1000;
  for (std::size_t i = 1; pts.size() < count && i <= max_attempts; ++i) {
    Point p;
    double u = radical_inverse(i, 2);
    if (dim == 1) p = Point(box.lo.x() + u * (box.hi.x() - box.lo.x()), 0, 0);
    else {
      double v = radical_inverse(i, 3);
      double x = box.lo.x() + u * (box.hi.x() - box.lo.x());
      if (box.torus) p = Point(x, 0, box.lo.z() + v * (box.hi.z() - box.lo.z()));
      else p = Point(x, box.lo.y() + v * (box.hi.y() - box.lo.y()), 0);
    }
    double d = geometry::signed_distance(domain, p);
    if (d > 0.0 && d < delta) pts.push_back(p);
  }
  if (pts.empty()) fail(ErrorCode::EmptyRegion, "no sample point fell inside the strip");
  return pts;
}

forms::EvalContext point_context(const Domain& domain, const Point& p) {
  forms::EvalContext c;
  c.x1 = p.x();
  c.x2 = p.y();
  c.x3 = p.z();
  c.r = std::hypot(p.x(), p.y());
  c.z = p.z();
  c.d = geometry::boundary_distance(domain, p);
  return c;
}

std::optional<mesh::AxisymmetricReduction> reduction_of(const ProblemSpec& pr) {
  if (!pr.domain.as<geometry::Torus>()) return std::nullopt;
  return mesh::axisymmetric_reduce(pr.domain, pr.torus_mode);
}

forms::FormSpec effective_form(const ProblemSpec& pr, forms::FormSpec form) {
  if (auto red = reduction_of(pr)) form = forms::with_mode(std::move(form), *red);
  return form;
}

double sup_distance(const Domain& domain) { return 0.5 * geometry::interior_diameter(domain); }

mesh::Mesh build_for_level(const ProblemSpec& pr, int k) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "strip index k must be >= 1");
  if (const auto* iv = pr.domain.as<geometry::Interval>()) {
    const double L = iv->b - iv->a;
    const int n = 2 * static_cast<int>(std::ceil(pr.elements_per_strip * k * L / 2.0 - 1e-9));
    return mesh::build_mesh_1d(pr.domain, std::max(2, n), pr.grading_1d);
  }
  const double h = std::min(pr.h, 1.0 / (k * pr.elements_per_strip_2d));
  if (auto red = reduction_of(pr)) return mesh::build_axisymmetric_mesh(*red, h, pr.grading_2d);
  return mesh::build_trimesh(pr.domain, h, pr.grading_2d);
}

mesh::Mesh restrict(const mesh::Mesh& full, double delta_in) {
  mesh::StripSpec strip{0.0, delta_in};
  return std::visit([&](const auto& m) -> mesh::Mesh { return mesh::restrict_to_strip(m, strip); }, full);
}

mesh::Mesh refine(const mesh::Mesh& m) {
  return std::visit([](const auto& mm) -> mesh::Mesh { return mesh::refine_uniform(mm); }, m);
}

// Frees the inner interface: Dirichlet tags survive only where d = 0.
void free_interface(mesh::Mesh& m) {
  if (auto* m1 = std::get_if<mesh::Mesh1D>(&m)) {
    for (std::size_t i = 0; i < m1->nodes.size(); ++i)
      if (m1->tags[i] == mesh::NodeTag::Dirichlet &&
          (m1->has_distance() ? m1->distance[i] : geometry::boundary_distance(m1->domain, Point(m1->nodes[i], 0, 0))) > 0.0)
        m1->tags[i] = mesh::NodeTag::Interior;
    return;
  }
  auto& m2 = std::get<mesh::TriMesh>(m);
  for (std::size_t i = 0; i < m2.vertices.size(); ++i)
    if (m2.tags[i] == mesh::NodeTag::Dirichlet && m2.distance[i] > 0.0) m2.tags[i] = mesh::NodeTag::Interior;
}

double strip_level(const ProblemSpec& pr, int k) { return std::min(1.0 / k, sup_distance(pr.domain)); }

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

} // namespace

std::string to_string(StripBoundary b) { return b == StripBoundary::Localized ? "localized" : "restricted"; }
std::string to_string(Verdict v) { return v == Verdict::Pass ? "PASS" : "FAIL"; }
std::string to_string(Discreteness d) { return d == Discreteness::Discrete ? "DISCRETE" : "INCONCLUSIVE"; }

double form_beta(const forms::FormSpec& form) { return form.beta.value_or(0.0); }

mesh::Mesh domain_mesh(const ProblemSpec& problem, int k) { return build_for_level(problem, k); }

mesh::Mesh strip_mesh(const ProblemSpec& problem, int k) {
  return restrict(build_for_level(problem, k), strip_level(problem, k));
}

std::vector<std::vector<double>> halton(std::size_t n, int dimension) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  if (dimension < 1 || dimension > 10) fail(ErrorCode::InvalidArgument, "Halton dimension must lie in [1, 10]");
  std::vector<std::vector<double>> pts(n, std::vector<double>(dimension));
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < dimension; ++j) pts[i][j] = radical_inverse(i + 1, primes[j]);
  return pts;
}

PerssonSequence persson_sequence(const ProblemSpec& pr) {
  if (pr.k_values.empty()) fail(ErrorCode::InvalidArgument, "k range is empty");
  for (std::size_t i = 1; i < pr.k_values.size(); ++i)
    if (pr.k_values[i] <= pr.k_values[i - 1]) fail(ErrorCode::InvalidArgument, "k range must be increasing");
  PerssonSequence seq;
  seq.beta = form_beta(pr.form);
  const double kap = hardy::kappa(seq.beta);
  const forms::FormSpec form = effective_form(pr, pr.form);
  const auto unit = forms::CoefficientExpr::constant(1.0);

  double qmin = std::numeric_limits<double>::infinity();
  for (const Point& p : strip_sample(pr.domain, strip_level(pr, pr.k_values.front()), 500))
    qmin = std::min(qmin, pr.form.potential.eval(point_context(pr.domain, p)));
  seq.bound_applies = pr.form.beta.has_value() && qmin >= 0.0;

  for (int k : pr.k_values) {
    mesh::Mesh m = strip_mesh(pr, k);
    forms::Pencil p = forms::assemble_pencil(m, form, unit, pr.quadrature);
    PerssonEntry e;
    e.k = k;
    e.delta = 1.0 / k;
    e.dofs = p.dofs();
    e.mu = eigen::smallest_eigenvalue(p, pr.solver);
    e.kappa_bound = kap * std::pow(k, 2.0 - seq.beta);
    e.gamma_bound = pr.gamma * e.kappa_bound;
    seq.entries.push_back(e);
  }
  const auto& es = seq.entries;
  bool positive = es.size() >= 2 && std::all_of(es.begin(), es.end(), [](const PerssonEntry& e) { return e.mu > 0.0; });
  if (positive) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(es.size());
    for (const auto& e : es) {
      double x = std::log(e.k), y = std::log(e.mu);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    seq.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return seq;
}

void write_csv(std::ostream& os, const PerssonSequence& seq) {
  char buf[256];
  os << "k,delta,dofs,mu,bound,gamma_bound\n";
  for (const auto& e : seq.entries) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%ld,%.17g,%.17g,%.17g\n", e.k, e.delta, static_cast<long>(e.dofs), e.mu,
                  e.kappa_bound, e.gamma_bound);
    os << buf;
  }
}

CriterionReport check_pointwise_criterion(const ProblemSpec& pr, double lambda, double alpha, std::size_t samples) {
  if (!(pr.gamma > 0.0 && pr.gamma < 1.0)) fail(ErrorCode::InvalidArgument, "gamma must lie in (0, 1)");
  if (samples == 0) fail(ErrorCode::InvalidArgument, "sample count must be positive");
  const double beta = form_beta(pr.form);
  const double kap = hardy::kappa(beta);
  CriterionReport rep;
  rep.criterion = "pointwise";
  rep.tolerance = kPointwiseTolerance;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  const auto pts = strip_sample(pr.domain, strip_level(pr, pr.k0), samples);
  rep.samples = pts.size();
  double worst_raw = 0.0;
  for (const Point& p : pts) {
    forms::EvalContext ctx = point_context(pr.domain, p);
    const double lhs = (1.0 - pr.gamma) * (kap * std::pow(ctx.d, beta - 2.0) + lambda * std::pow(ctx.d, alpha));
    const double qm = std::max(-pr.form.potential.eval(ctx), 0.0);
    const double raw = lhs - qm;
    const double scaled = raw / (1.0 + std::abs(lhs) + qm);
    if (scaled < rep.worst_margin) {
      rep.worst_margin = scaled;
      rep.worst_point = p;
      worst_raw = raw;
    }
  }
  rep.verdict = rep.worst_margin >= -rep.tolerance ? Verdict::Pass : Verdict::Fail;
  rep.details = "margin relative to 1 + |terms|; raw margin at worst point " + number(worst_raw) + ", d = " +
                number(geometry::boundary_distance(pr.domain, rep.worst_point));
  return rep;
}

CriterionReport check_form_nonnegativity(const ProblemSpec& pr, int k, int levels, StripBoundary boundary) {
  if (!(pr.gamma > 0.0 && pr.gamma < 1.0)) fail(ErrorCode::InvalidArgument, "gamma must lie in (0, 1)");
  if (levels < 1) fail(ErrorCode::InvalidArgument, "form check needs at least one level");
  CriterionReport rep;
  rep.criterion = "form";
  rep.tolerance = kFormTolerance;
  forms::FormSpec form;
  form.diffusion = pr.form.diffusion.scaled(1.0 - pr.gamma);
  form.potential = pr.form.potential.negative_part().scaled(-1.0);
  form.beta = pr.form.beta;
  form = effective_form(pr, form);
  const auto unit = forms::CoefficientExpr::constant(1.0);

  mesh::Mesh m = strip_mesh(pr, k);
  for (int l = 0; l < levels; ++l) {
    if (l > 0) m = refine(m);
    mesh::Mesh work = m;
    if (boundary == StripBoundary::Restricted) free_interface(work);
    forms::Pencil p = forms::assemble_pencil(work, form, unit, pr.quadrature);
    rep.level_minima.push_back(eigen::smallest_eigenvalue(p, pr.solver));
    rep.level_dofs.push_back(p.dofs());
  }
  rep.worst_margin = *std::min_element(rep.level_minima.begin(), rep.level_minima.end());
  rep.verdict = rep.worst_margin >= -rep.tolerance ? Verdict::Pass : Verdict::Fail;
  rep.samples = 0;
  std::ostringstream os;
  os << "strip d < " << number(strip_level(pr, k)) << ", boundary " << to_string(boundary) << ", minima";
  for (double v : rep.level_minima) os << ' ' << number(v);
  rep.details = os.str();
  return rep;
}

DiagnosticReport discreteness_diagnostic(const ProblemSpec& pr, const DiagnosticOptions& opt) {
  if (pr.k_values.size() < 5) fail(ErrorCode::InvalidArgument, "the diagnostic needs at least 5 values of k");
  DiagnosticReport rep;
  rep.stages.push_back(check_pointwise_criterion(pr, opt.lambda, opt.alpha, opt.samples));
  if (rep.stages.back().verdict == Verdict::Fail) {
    rep.failed_stage = 1;
    rep.reason = "pointwise criterion FAIL";
    return rep;
  }
  rep.stages.push_back(check_form_nonnegativity(pr, pr.k0, opt.form_levels));
  if (rep.stages.back().verdict == Verdict::Fail) {
    rep.failed_stage = 2;
    rep.reason = "form criterion FAIL";
    return rep;
  }
  rep.persson = persson_sequence(pr);
  const auto& seq = *rep.persson;
  const double target = (2.0 - seq.beta) - opt.exponent_slack;
  if (!seq.exponent || *seq.exponent < target) {
    rep.failed_stage = 3;
    rep.reason = seq.exponent ? "fitted exponent " + number(*seq.exponent) + " below " + number(target)
                              : "growth exponent undefined (non-positive mu_k)";
    return rep;
  }
  for (const auto& e : seq.entries)
    if (e.mu < e.gamma_bound) {
      rep.failed_stage = 3;
      rep.reason = "mu_k below gamma kappa k^(2-beta) at k = " + std::to_string(e.k);
      return rep;
    }
  rep.verdict = Discreteness::Discrete;
  rep.reason = "all criteria PASS; fitted exponent " + number(*seq.exponent);
  return rep;
}

} // namespace hardylab::spectral
