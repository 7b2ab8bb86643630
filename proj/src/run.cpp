#include "hardylab/run.hpp"

#include <filesystem>
#include <sstream>

#include "hardylab/errors.hpp"
#include "hardylab/mesh.hpp"

namespace hardylab::run {

namespace {

using report::json;
using report::real;

struct Result {
  std::string status = "OK";
  int exit_code = kExitSuccess;
  json body;
  std::string csv;   // empty when the command has no table
};

const geometry::Domain& domain_of(const config::RunConfig& cfg) { return cfg.domain.domain; }
int dim(const config::RunConfig& cfg) { return domain_of(cfg).dimension(); }

json mesh_entry(const std::string& label, const mesh::Mesh& m) {
  auto s = std::visit([](const auto& mm) { return mesh::stats(mm); }, m);
  return {{"label", label},
          {"description", mesh::describe(m)},
          {"nodes", s.nodes},
          {"elements", s.elements},
          {"min_size", s.min_size},
          {"max_size", s.max_size}};
}

double hardy_beta(const config::RunConfig& cfg) {
  if (!cfg.form.a.empty())
    fail(ErrorCode::ConfigError, "[form] a: the Hardy pencil uses a = d^beta; set [form] beta instead");
  return cfg.form.beta.value_or(0.0);
}

int scan_resolution(const config::RunConfig& cfg) {
  return cfg.numerics.scan_resolution > 0 ? cfg.numerics.scan_resolution : 200;
}

hardy::HardyBoundSpec resolve_lambda(const config::RunConfig& cfg, double beta) {
  const auto& h = cfg.hardy;
  if (h.method) {
    hardy::BoundRequest req{*h.method, h.alpha, beta, h.delta, scan_resolution(cfg)};
    return hardy::lambda_bound(domain_of(cfg), req);
  }
  hardy::HardyBoundSpec spec;
  spec.beta = beta;
  spec.alpha = h.alpha;
  spec.kappa = hardy::kappa(beta);
  spec.lambda = h.lambda.value_or(0.0);
  if (h.lambda) spec.notes.push_back("lambda given explicitly");
  return spec;
}

geometry::Point config_point(const config::RunConfig& cfg) {
  const int d = dim(cfg);
  if (cfg.point.empty()) fail(ErrorCode::ConfigError, "[point] x: missing");
  if (static_cast<int>(cfg.point.size()) != d)
    fail(ErrorCode::ConfigError, "[point] x: the " + domain_of(cfg).kind() + " needs " + std::to_string(d) +
                                     " coordinates, got " + std::to_string(cfg.point.size()));
  geometry::Point p = geometry::Point::Zero();
  for (int i = 0; i < d; ++i) p[i] = cfg.point[i];
  return p;
}

Result distance(const config::RunConfig& cfg, bool dry_run) {
  Result r;
  const auto& dom = domain_of(cfg);
  geometry::Point p = config_point(cfg);
  if (dry_run) {
    r.body = {{"point", report::to_json(p, dim(cfg))}, {"inside", geometry::contains(dom, p, geometry::membership_tolerance(dom))}};
    return r;
  }
  auto eval = geometry::distance_calculus(dom, p, geometry::default_fd_step(dom));
  r.body = report::to_json(eval, dim(cfg));
  r.body["point"] = report::to_json(p, dim(cfg));
  r.body["scan"] = nullptr;
  std::ostringstream csv;
  csv << "x1,x2,x3,d,grad1,grad2,grad3,neg_laplacian\n";
  csv << real(p[0]) << ',' << real(p[1]) << ',' << real(p[2]) << ',' << real(eval.d) << ',' << real(eval.grad[0])
      << ',' << real(eval.grad[1]) << ',' << real(eval.grad[2]) << ',' << real(eval.neg_laplacian) << '\n';
  r.csv = csv.str();
  if (cfg.numerics.scan_resolution > 0) {
    auto region = cfg.hardy.delta ? geometry::ScanRegion::tubular(*cfg.hardy.delta) : geometry::ScanRegion::full();
    auto scan = geometry::superharmonicity_scan(dom, region, cfg.numerics.scan_resolution);
    r.body["scan"] = report::to_json(scan, dim(cfg));
    r.status = geometry::to_string(scan.verdict);
    r.exit_code = scan.verdict == geometry::Verdict::Pass ? kExitSuccess : kExitVerdict;
  }
  return r;
}

Result hardy_run(const config::RunConfig& cfg, bool dry_run) {
  Result r;
  const double beta = hardy_beta(cfg);
  const hardy::Ladder ladder = config::build_ladder(cfg);
  if (dry_run) {
    json meshes = json::array();
    auto ms = hardy::ladder_meshes(domain_of(cfg), ladder);
    for (std::size_t i = 0; i < ms.size(); ++i) meshes.push_back(mesh_entry("level " + std::to_string(i), ms[i]));
    r.body = {{"meshes", meshes}};
    return r;
  }
  auto constants = hardy::hardy_constants(cfg.hardy.alpha, beta);
  auto bound = resolve_lambda(cfg, beta);
  auto cert = hardy::verify_hardy(domain_of(cfg), beta, cfg.hardy.alpha, bound.lambda, ladder);
  cert.spec = bound;
  r.body = {{"constants", report::to_json(constants)},
            {"bound", report::to_json(bound)},
            {"certificate", report::to_json(cert)}};
  r.status = hardy::to_string(cert.verdict);
  r.exit_code = cert.verdict == hardy::CertVerdict::Certified ? kExitSuccess : kExitVerdict;
  std::ostringstream csv;
  csv << "beta,alpha,lambda,level,dofs,minimum,margin\n";
  for (const auto& l : cert.levels)
    csv << real(beta) << ',' << real(cfg.hardy.alpha) << ',' << real(bound.lambda) << ',' << l.level << ','
        << l.dofs << ',' << real(l.minimum) << ',' << real(l.margin) << '\n';
  r.csv = csv.str();
  return r;
}

struct SpectrumSetup {
  mesh::Mesh mesh;
  forms::FormSpec form;
};

SpectrumSetup spectrum_setup(const config::RunConfig& cfg) {
  const auto& dom = domain_of(cfg);
  const auto& nc = cfg.numerics;
  forms::FormSpec form = config::build_form(cfg);
  if (dom.dimension() == 1) return {mesh::build_mesh_1d(dom, nc.n.front(), nc.grading.value_or(1.0)), form};
  if (dom.as<geometry::Torus>()) {
    auto red = mesh::axisymmetric_reduce(dom, nc.mode);
    return {mesh::build_axisymmetric_mesh(red, nc.h, nc.grading_2d), forms::with_mode(form, red)};
  }
  return {mesh::build_trimesh(dom, nc.h, nc.grading_2d), form};
}

mesh::Mesh refined(const mesh::Mesh& m, int times) {
  mesh::Mesh out = m;
  for (int i = 0; i < times; ++i) out = std::visit([](const auto& mm) -> mesh::Mesh { return mesh::refine_uniform(mm); }, out);
  return out;
}

Result spectrum(const config::RunConfig& cfg, bool dry_run) {
  Result r;
  SpectrumSetup setup = spectrum_setup(cfg);
  if (dry_run) {
    json meshes = json::array({mesh_entry("base", setup.mesh)});
    if (cfg.numerics.extrapolate)
      for (int l = 1; l < cfg.numerics.levels; ++l)
        meshes.push_back(mesh_entry("level " + std::to_string(l), refined(setup.mesh, l)));
    r.body = {{"meshes", meshes}};
    return r;
  }
  const auto weight = forms::CoefficientExpr::parse(cfg.form.weight);
  forms::QuadratureOptions quad;
  quad.order = cfg.numerics.quadrature;
  const auto solver = config::build_solver(cfg);
  forms::Pencil pencil = forms::assemble_pencil(setup.mesh, setup.form, weight, quad);
  auto rep = eigen::smallest_eigenpairs(pencil, cfg.numerics.count, solver);
  eigen::require_converged(rep);
  rep.mesh = mesh::describe(setup.mesh);
  r.body = report::to_json(rep);
  r.body["convergence"] = nullptr;
  if (cfg.numerics.extrapolate) {
    auto recipe = [&](int level) {
      return forms::assemble_pencil(refined(setup.mesh, level), setup.form, weight, quad);
    };
    r.body["convergence"] = report::to_json(eigen::refine_and_extrapolate(recipe, cfg.numerics.levels, solver));
  }
  std::ostringstream csv;
  eigen::write_csv(csv, rep);
  r.csv = csv.str();
  return r;
}

Result persson(const config::RunConfig& cfg, bool dry_run) {
  Result r;
  auto problem = config::build_problem(cfg);
  if (dry_run) {
    json meshes = json::array();
    for (int k : problem.k_values) meshes.push_back(mesh_entry("k = " + std::to_string(k), spectral::strip_mesh(problem, k)));
    r.body = {{"meshes", meshes}};
    return r;
  }
  auto seq = spectral::persson_sequence(problem);
  r.body = report::to_json(seq);
  std::ostringstream csv;
  spectral::write_csv(csv, seq);
  r.csv = csv.str();
  return r;
}

std::string criterion_rows(const spectral::CriterionReport& c) {
  std::ostringstream csv;
  for (std::size_t l = 0; l < c.level_minima.size(); ++l)
    csv << c.criterion << ',' << l << ',' << c.level_dofs[l] << ',' << real(c.level_minima[l]) << '\n';
  return csv.str();
}

Result criteria(const config::RunConfig& cfg, bool dry_run) {
  Result r;
  auto problem = config::build_problem(cfg);
  if (dry_run) {
    mesh::Mesh strip = spectral::strip_mesh(problem, problem.k0);
    r.body = {{"meshes", json::array({mesh_entry("k0 = " + std::to_string(problem.k0), strip)})}};
    return r;
  }
  const double lambda = resolve_lambda(cfg, spectral::form_beta(problem.form)).lambda;
  auto pointwise = spectral::check_pointwise_criterion(problem, lambda, cfg.hardy.alpha, cfg.numerics.samples);
  auto form = spectral::check_form_nonnegativity(problem, problem.k0, cfg.numerics.levels, cfg.numerics.boundary);
  const bool pass = pointwise.verdict == spectral::Verdict::Pass && form.verdict == spectral::Verdict::Pass;
  r.status = pass ? "PASS" : "FAIL";
  r.exit_code = pass ? kExitSuccess : kExitVerdict;
  r.body = {{"verdict", r.status},
            {"lambda", lambda},
            {"pointwise", report::to_json(pointwise, dim(cfg))},
            {"form", report::to_json(form, dim(cfg))}};
  r.csv = "criterion,level,dofs,minimum\n" + criterion_rows(form);
  return r;
}

Result diagnose(const config::RunConfig& cfg, bool dry_run) {
  Result r;
  auto problem = config::build_problem(cfg);
  if (problem.k_values.size() < 5)
    fail(ErrorCode::ConfigError, "[numerics] k: the diagnostic needs at least 5 values of k");
  if (dry_run) {
    json meshes = json::array();
    for (int k : problem.k_values) meshes.push_back(mesh_entry("k = " + std::to_string(k), spectral::strip_mesh(problem, k)));
    r.body = {{"meshes", meshes}};
    return r;
  }
  spectral::DiagnosticOptions opts;
  opts.lambda = resolve_lambda(cfg, spectral::form_beta(problem.form)).lambda;
  opts.alpha = cfg.hardy.alpha;
  opts.samples = cfg.numerics.samples;
  opts.form_levels = cfg.numerics.levels;
  auto diag = spectral::discreteness_diagnostic(problem, opts);
  r.body = report::to_json(diag, dim(cfg));
  r.status = spectral::to_string(diag.verdict);
  r.exit_code = diag.verdict == spectral::Discreteness::Discrete ? kExitSuccess : kExitVerdict;
  if (diag.persson) {
    std::ostringstream csv;
    spectral::write_csv(csv, *diag.persson);
    r.csv = csv.str();
  }
  return r;
}

Result dispatch(config::Command c, const config::RunConfig& cfg, bool dry_run) {
  switch (c) {
  case config::Command::Distance: return distance(cfg, dry_run);
  case config::Command::Hardy: return hardy_run(cfg, dry_run);
  case config::Command::Spectrum: return spectrum(cfg, dry_run);
  case config::Command::Persson: return persson(cfg, dry_run);
  case config::Command::Criteria: return criteria(cfg, dry_run);
  case config::Command::Diagnose: return diagnose(cfg, dry_run);
  }
  fail(ErrorCode::InvalidArgument, "unknown command");
}

} // namespace

Outcome execute(config::Command command, const config::RunConfig& cfg_in, bool dry_run) {
  config::RunConfig cfg = cfg_in;
  if (cfg.command && *cfg.command != command)
    fail(ErrorCode::ConfigError, "[run] command: config names '" + config::to_string(*cfg.command) +
                                     "' but the '" + config::to_string(command) + "' subcommand was invoked");
  cfg.command = command;
  const std::string name = config::to_string(command);
  const json resolved = report::to_json(cfg);

  Outcome out;
  std::string csv;
  try {
    Result r = dispatch(command, cfg, dry_run);
    if (dry_run) {
      r.status = "VALID";
      r.exit_code = kExitSuccess;
      r.csv.clear();
    }
    out.exit_code = r.exit_code;
    out.report = report::envelope(name, r.status, r.exit_code, dry_run, resolved, r.body);
    csv = std::move(r.csv);
  } catch (const Error& e) {
    out.exit_code = kExitError;
    out.report = report::error_report(name, std::string(to_string(e.code())), e.what(), resolved);
  } catch (const std::exception& e) {
    out.exit_code = kExitError;
    out.report = report::error_report(name, "InternalError", e.what(), resolved);
  }

  namespace fs = std::filesystem;
  const fs::path dir(cfg.output.dir);
  if (cfg.output.json) {
    auto path = (dir / (name + ".json")).string();
    report::write_atomic(path, out.report.dump(2) + "\n");
    out.files.push_back(path);
  }
  if (cfg.output.csv && !csv.empty()) {
    auto path = (dir / (name + ".csv")).string();
    report::write_atomic(path, csv);
    out.files.push_back(path);
  }
  return out;
}

} // namespace hardylab::run
