#include "hardylab/hardy.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "hardylab/errors.hpp"

namespace hardylab::hardy {

namespace {

void require_beta(double beta) {
  if (!(beta < 1.0)) fail(ErrorCode::ExponentOutOfRange, "beta must be < 1");
}

std::string number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_convex(const Domain& domain, Method m) {
  if (!domain.is_convex())
    fail(ErrorCode::MethodNotApplicable,
         to_string(m) + " requires a convex domain; " + domain.kind() + " is not convex");
}

} // namespace

double kappa(double beta) {
  require_beta(beta);
  return 0.25 * (1.0 - beta) * (1.0 - beta);
}

double fmt_constant(double alpha, double beta) {
  require_beta(beta);
  if (!(alpha > beta - 2.0)) fail(ErrorCode::ExponentOutOfRange, "weighted constant needs alpha > beta - 2");
  const double scale = std::exp2(alpha - beta);
  if (alpha < -1.0) return scale * (alpha + 2.0 - beta) * (alpha + 2.0 - beta);
  return scale * (1.0 - beta) * (2.0 * alpha + 3.0 - beta);
}

double tubular_constant(double alpha, double beta) {
  require_beta(beta);
  if (!(alpha > 0.5 * (beta - 3.0))) fail(ErrorCode::ExponentOutOfRange, "tubular constant needs alpha > (beta - 3)/2");
  return std::exp2(alpha - beta + 1.0) * (2.0 * alpha - beta + 3.0) / std::pow(1.0 - beta, alpha - beta + 2.0);
}

HardyConstants hardy_constants(double alpha, double beta) {
  HardyConstants c;
  c.kappa = kappa(beta);
  if (alpha > beta - 2.0) c.c_fmt = fmt_constant(alpha, beta);
  if (alpha > 0.5 * (beta - 3.0)) c.c_tub = tubular_constant(alpha, beta);
  return c;
}

std::string to_string(Method m) {
  switch (m) {
  case Method::None: return "none";
  case Method::BrezisMarcus: return "brezis_marcus";
  case Method::FmtDint: return "fmt_dint";
  case Method::AvkhadievWirths: return "avkhadiev_wirths";
  case Method::HhlVolume: return "hhl_volume";
  case Method::EvansLewisVolume: return "evans_lewis_volume";
  case Method::FmtWeighted: return "fmt_weighted";
  case Method::Tubular: return "tubular";
  }
  return "none";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::None, Method::BrezisMarcus, Method::FmtDint, Method::AvkhadievWirths, Method::HhlVolume,
                   Method::EvansLewisVolume, Method::FmtWeighted, Method::Tubular})
    if (to_string(m) == name) return m;
  fail(ErrorCode::InvalidArgument, "unknown lambda method '" + name + "'");
}

double volume_constant(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "dimension must be >= 1");
  const double nd = n;
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * nd) / std::tgamma(0.5 * nd);
  return std::pow(nd, 1.0 - 2.0 / nd) * std::pow(sphere, 2.0 / nd);
}

HardyBoundSpec lambda_bound(const Domain& domain, const BoundRequest& req) {
  HardyBoundSpec spec;
  spec.beta = req.beta;
  spec.alpha = req.alpha;
  spec.kappa = kappa(req.beta);
  spec.method = req.method;
  const int n = domain.dimension();
  const double dint = geometry::interior_diameter(domain);
  switch (req.method) {
  case Method::None:
    spec.lambda = 0.0;
    break;
  case Method::BrezisMarcus: {
    require_convex(domain, req.method);
    const double D = geometry::diameter(domain);
    spec.lambda = 1.0 / (4.0 * D * D);
    spec.notes.push_back("convex domain; usual diameter " + number(D));
    break;
  }
  case Method::FmtDint:
    require_convex(domain, req.method);
    spec.lambda = 3.0 / (dint * dint);
    spec.notes.push_back("convex domain; interior diameter " + number(dint));
    break;
  case Method::AvkhadievWirths:
    require_convex(domain, req.method);
    spec.lambda = 4.0 * kAvkhadievWirthsLambda0 / (dint * dint);
    spec.notes.push_back("convex domain; lambda_0 pinned at its stated lower bound 0.94");
    break;
  case Method::HhlVolume:
  case Method::EvansLewisVolume: {
    require_convex(domain, req.method);
    const double vol = geometry::volume(domain);
    const double K = volume_constant(n);
    const double scale = std::pow(vol, 2.0 / n);
    spec.lambda = req.method == Method::HhlVolume ? K / (4.0 * scale) : 3.0 * K / (2.0 * scale);
    spec.notes.push_back("convex domain; K(" + std::to_string(n) + ") = " + number(K) + ", volume " + number(vol));
    break;
  }
  case Method::FmtWeighted: {
    auto scan = geometry::superharmonicity_scan(domain, geometry::ScanRegion::full(), req.scan_resolution);
    if (scan.verdict != geometry::Verdict::Pass)
      fail(ErrorCode::MethodNotApplicable, "fmt_weighted requires -Laplacian(d) >= 0 on the domain; scan minimum " +
                                               number(scan.min_value));
    spec.lambda = fmt_constant(req.alpha, req.beta) * std::pow(dint, req.beta - (req.alpha + 2.0));
    spec.notes.push_back("superharmonicity scan PASS, minimum " + number(scan.min_value));
    break;
  }
  case Method::Tubular: {
    if (!req.delta) fail(ErrorCode::InvalidArgument, "tubular bound needs the width delta");
    const double delta = *req.delta;
    if (!(delta > 0.0 && delta <= 0.5 * (1.0 - req.beta)))
      fail(ErrorCode::MethodNotApplicable, "tubular bound needs 0 < delta <= (1 - beta)/2");
    auto scan = geometry::superharmonicity_scan(domain, geometry::ScanRegion::tubular(delta), req.scan_resolution);
    if (scan.verdict != geometry::Verdict::Pass)
      fail(ErrorCode::MethodNotApplicable, "tubular requires -Laplacian(d) >= 0 on {d < delta}; scan minimum " +
                                               number(scan.min_value));
    spec.delta = delta;
    spec.lambda = tubular_constant(req.alpha, req.beta) * delta;
    spec.notes.push_back("superharmonicity scan on {d < " + number(delta) + "} PASS, minimum " +
                         number(scan.min_value));
    spec.notes.push_back("C^2 boundary assumed, not checked");
    break;
  }
  }
  return spec;
}

std::string to_string(CertVerdict v) { return v == CertVerdict::Certified ? "CERTIFIED" : "INCONCLUSIVE"; }

forms::Pencil hardy_pencil(const mesh::Mesh& m, double beta, double alpha, double lambda,
                           const forms::QuadratureOptions& quad) {
  require_beta(beta);
  if (!(lambda >= 0.0)) fail(ErrorCode::InvalidArgument, "lambda must be >= 0");
  forms::FormSpec form = forms::power_form(beta);
  if (lambda != 0.0) form.potential = forms::CoefficientExpr::distance_power(alpha).scaled(-lambda);
  return forms::assemble_pencil(m, form, forms::CoefficientExpr::distance_power(beta - 2.0), quad);
}

std::vector<mesh::Mesh> ladder_meshes(const Domain& domain, const Ladder& ladder) {
  std::vector<mesh::Mesh> out;
  if (domain.dimension() == 1) {
    for (int n : ladder.n_1d)
      out.emplace_back(mesh::build_mesh_1d(domain, n, ladder.grading_1d.value_or(mesh::default_grading_1d(n))));
    return out;
  }
  if (ladder.levels_2d < 1) fail(ErrorCode::InvalidArgument, "ladder needs at least one level");
  mesh::TriMesh base = domain.as<geometry::Torus>()
                           ? mesh::build_axisymmetric_mesh(mesh::axisymmetric_reduce(domain, 0), ladder.h,
                                                           ladder.grading_2d)
                           : mesh::build_trimesh(domain, ladder.h, ladder.grading_2d);
  out.emplace_back(base);
  for (int l = 1; l < ladder.levels_2d; ++l) out.emplace_back(mesh::refine_uniform(std::get<mesh::TriMesh>(out.back())));
  return out;
}

HardyCertificate verify_hardy(const Domain& domain, double beta, double alpha, double lambda, const Ladder& ladder) {
  HardyCertificate cert;
  cert.domain = domain.kind();
  cert.spec.beta = beta;
  cert.spec.alpha = alpha;
  cert.spec.kappa = kappa(beta);
  cert.spec.lambda = lambda;
  cert.semantics =
      "conforming piecewise-linear trial spaces: each minimum is an upper bound for the continuum infimum; "
      "CERTIFIED means the inequality holds on every tested subspace and is consistent with, not a proof of, "
      "the continuum inequality";
  eigen::SolverOptions opts = ladder.solver;
  std::vector<mesh::Mesh> meshes = ladder_meshes(domain, ladder);
  for (std::size_t l = 0; l < meshes.size(); ++l) {
    forms::Pencil p = hardy_pencil(meshes[l], beta, alpha, lambda, ladder.quadrature);
    double minimum = eigen::smallest_eigenvalue(p, opts);
    cert.levels.push_back({static_cast<int>(l), p.dofs(), minimum, minimum - cert.spec.kappa});
  }
  const auto& lv = cert.levels;
  cert.margin = lv.back().margin;
  cert.trend_limit = cert.margin;
  if (lv.size() >= 2) {
    double decrement = lv[lv.size() - 2].margin - lv.back().margin;
    if (decrement > 0.0) cert.trend_limit = cert.margin - decrement;
  }
  bool ok = cert.trend_limit >= -cert.cert_tol;
  for (const auto& l : lv) ok = ok && l.margin >= -cert.cert_tol;
  cert.verdict = ok ? CertVerdict::Certified : CertVerdict::Inconclusive;
  return cert;
}

} // namespace hardylab::hardy
