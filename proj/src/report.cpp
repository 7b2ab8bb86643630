#include "hardylab/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "hardylab/errors.hpp"

namespace hardylab::report {

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string type_of(const json& j) {
  switch (j.type()) {
  case json::value_t::null: return "null";
  case json::value_t::boolean: return "boolean";
  case json::value_t::number_integer:
  case json::value_t::number_unsigned: return "integer";
  case json::value_t::number_float: return "number";
  case json::value_t::string: return "string";
  case json::value_t::array: return "array";
  case json::value_t::object: return "object";
  default: return "unknown";
  }
}

bool has_type(const json& j, const std::string& t) {
  const std::string actual = type_of(j);
  if (t == actual) return true;
  if (t == "number" && actual == "integer") return true;
  if (t == "integer" && actual == "number") {
    double v = j.get<double>();
    return std::isfinite(v) && v == std::floor(v);
  }
  return false;
}

class Validator {
public:
  explicit Validator(const json& root) : root_(root) {}

  void check(const json& inst, const json& schema, const std::string& path) {
    if (schema.is_boolean()) {
      if (!schema.get<bool>()) errors.push_back(path + ": no value allowed");
      return;
    }
    if (auto it = schema.find("$ref"); it != schema.end()) {
      check(inst, resolve(it->get<std::string>()), path);
    }
    if (auto it = schema.find("type"); it != schema.end()) {
      bool ok = false;
      if (it->is_string()) ok = has_type(inst, it->get<std::string>());
      else
        for (const auto& t : *it) ok = ok || has_type(inst, t.get<std::string>());
      if (!ok) {
        errors.push_back(path + ": expected type " + it->dump() + ", got " + type_of(inst));
        return;
      }
    }
    if (auto it = schema.find("const"); it != schema.end() && inst != *it)
      errors.push_back(path + ": expected " + it->dump());
    if (auto it = schema.find("enum"); it != schema.end()) {
      bool found = false;
      for (const auto& e : *it) found = found || e == inst;
      if (!found) errors.push_back(path + ": " + inst.dump() + " not in " + it->dump());
    }
    if (auto it = schema.find("minimum"); it != schema.end() && inst.is_number() &&
                                          inst.get<double>() < it->get<double>())
      errors.push_back(path + ": below minimum " + it->dump());
    if (auto it = schema.find("maximum"); it != schema.end() && inst.is_number() &&
                                          inst.get<double>() > it->get<double>())
      errors.push_back(path + ": above maximum " + it->dump());
    if (inst.is_object()) {
      if (auto it = schema.find("required"); it != schema.end())
        for (const auto& k : *it)
          if (!inst.contains(k.get<std::string>())) errors.push_back(path + ": missing '" + k.get<std::string>() + "'");
      const json* props = nullptr;
      if (auto it = schema.find("properties"); it != schema.end()) props = &*it;
      for (const auto& [k, v] : inst.items()) {
        if (props && props->contains(k)) check(v, (*props)[k], path + "/" + k);
        else if (auto ap = schema.find("additionalProperties"); ap != schema.end()) {
          if (ap->is_boolean() && !ap->get<bool>()) errors.push_back(path + ": unexpected property '" + k + "'");
          else if (ap->is_object()) check(v, *ap, path + "/" + k);
        }
      }
    }
    if (inst.is_array()) {
      if (auto it = schema.find("minItems"); it != schema.end() && inst.size() < it->get<std::size_t>())
        errors.push_back(path + ": fewer than " + it->dump() + " items");
      if (auto it = schema.find("items"); it != schema.end())
        for (std::size_t i = 0; i < inst.size(); ++i) check(inst[i], *it, path + "/" + std::to_string(i));
    }
    if (auto it = schema.find("allOf"); it != schema.end())
      for (const auto& sub : *it) check(inst, sub, path);
    if (auto it = schema.find("if"); it != schema.end()) {
      Validator probe(root_);
      probe.check(inst, *it, path);
      if (probe.errors.empty()) {
        if (auto then = schema.find("then"); then != schema.end()) check(inst, *then, path);
      } else if (auto other = schema.find("else"); other != schema.end()) {
        check(inst, *other, path);
      }
    }
  }

  std::vector<std::string> errors;

private:
  const json& resolve(const std::string& ref) {
    if (ref.rfind("#", 0) != 0) fail(ErrorCode::InvalidArgument, "only local $ref supported: " + ref);
    return root_.at(json::json_pointer(ref.substr(1)));
  }

  const json& root_;
};

} // namespace

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const geometry::Point& p, int dimension) {
  json a = json::array();
  for (int i = 0; i < dimension; ++i) a.push_back(p[i]);
  return a;
}

json to_json(const geometry::DistanceEval& e, int dimension) {
  return {{"d", e.d},
          {"gradient", to_json(e.grad, dimension)},
          {"neg_laplacian", e.neg_laplacian},
          {"provenance", e.provenance == geometry::Provenance::Analytic ? "analytic" : "finite_difference"},
          {"near_ridge", e.near_ridge}};
}

json to_json(const geometry::SuperharmonicityReport& r, int dimension) {
  return {{"min_value", r.min_value},
          {"argmin", to_json(r.argmin, dimension)},
          {"verdict", geometry::to_string(r.verdict)},
          {"resolution", r.resolution},
          {"tolerance", r.tolerance},
          {"points_evaluated", r.points_evaluated},
          {"points_excluded", r.points_excluded}};
}

json to_json(const hardy::HardyConstants& c) {
  return {{"kappa", c.kappa}, {"c_fmt", optional_number(c.c_fmt)}, {"c_tub", optional_number(c.c_tub)}};
}

json to_json(const hardy::HardyBoundSpec& s) {
  return {{"beta", s.beta},     {"alpha", s.alpha},
          {"kappa", s.kappa},   {"method", hardy::to_string(s.method)},
          {"lambda", s.lambda}, {"delta", optional_number(s.delta)},
          {"notes", s.notes}};
}

json to_json(const hardy::HardyCertificate& c) {
  json levels = json::array();
  for (const auto& l : c.levels)
    levels.push_back({{"level", l.level}, {"dofs", l.dofs}, {"minimum", l.minimum}, {"margin", l.margin}});
  return {{"domain", c.domain},           {"levels", levels},        {"margin", c.margin},
          {"trend_limit", c.trend_limit}, {"cert_tol", c.cert_tol}, {"verdict", hardy::to_string(c.verdict)},
          {"semantics", c.semantics}};
}

json to_json(const eigen::SpectralReport& r) {
  return {{"eigenvalues", r.eigenvalues},
          {"residuals", r.residuals},
          {"residual_floors", r.residual_floors},
          {"iterations", r.iterations},
          {"restarts", r.restarts},
          {"dofs", r.dofs},
          {"shift", r.shift},
          {"tolerance", r.tolerance},
          {"converged", r.converged},
          {"mesh", r.mesh},
          {"notes", r.notes}};
}

json to_json(const eigen::ConvergenceTable& t) {
  json levels = json::array();
  for (const auto& l : t.levels) levels.push_back({{"level", l.level}, {"dofs", l.dofs}, {"value", l.value}});
  json rates = json::array();
  for (double r : t.rates) rates.push_back(finite_or_null(r));
  return {{"levels", levels},
          {"rates", rates},
          {"rate", optional_number(t.rate)},
          {"extrapolated", t.extrapolated},
          {"status", eigen::to_string(t.status)}};
}

json to_json(const spectral::PerssonSequence& s) {
  json entries = json::array();
  for (const auto& e : s.entries)
    entries.push_back({{"k", e.k},
                       {"delta", e.delta},
                       {"dofs", e.dofs},
                       {"mu", e.mu},
                       {"kappa_bound", e.kappa_bound},
                       {"gamma_bound", e.gamma_bound}});
  return {{"beta", s.beta},
          {"bound_applies", s.bound_applies},
          {"exponent", optional_number(s.exponent)},
          {"entries", entries}};
}

json to_json(const spectral::CriterionReport& r, int dimension) {
  return {{"criterion", r.criterion},
          {"verdict", spectral::to_string(r.verdict)},
          {"worst_margin", r.worst_margin},
          {"worst_point", to_json(r.worst_point, dimension)},
          {"tolerance", r.tolerance},
          {"samples", r.samples},
          {"level_minima", r.level_minima},
          {"level_dofs", r.level_dofs},
          {"details", r.details}};
}

json to_json(const spectral::DiagnosticReport& r, int dimension) {
  json stages = json::array();
  for (const auto& s : r.stages) stages.push_back(to_json(s, dimension));
  return {{"verdict", spectral::to_string(r.verdict)},
          {"stages", stages},
          {"persson", r.persson ? to_json(*r.persson) : json(nullptr)},
          {"failed_stage", r.failed_stage},
          {"reason", r.reason}};
}

json to_json(const config::RunConfig& cfg) {
  const auto& d = cfg.domain.domain;
  json domain = {{"kind", cfg.domain.kind}};
  if (auto s = d.as<geometry::Interval>()) {
    domain["a"] = s->a;
    domain["b"] = s->b;
  } else if (auto s = d.as<geometry::ConvexPolygon>()) {
    json v = json::array();
    for (const auto& p : s->vertices) v.push_back({p.x(), p.y()});
    domain["vertices"] = v;
  } else if (auto s = d.as<geometry::Disc>()) {
    domain["center"] = {s->center.x(), s->center.y()};
    domain["radius"] = s->radius;
  } else if (auto s = d.as<geometry::Annulus>()) {
    domain["center"] = {s->center.x(), s->center.y()};
    domain["r_in"] = s->r_in;
    domain["r_out"] = s->r_out;
  } else if (auto s = d.as<geometry::Torus>()) {
    domain["axis_distance"] = s->c;
    domain["tube_radius"] = s->R;
  }

  const auto& f = cfg.form;
  json form = {{"a", f.a.empty() ? (f.beta ? "d^" + real(*f.beta) : std::string("1")) : f.a},
               {"beta", optional_number(f.beta)},
               {"q", f.q},
               {"sigma", f.sigma},
               {"weight", f.weight},
               {"gamma", f.gamma}};
  const auto& h = cfg.hardy;
  json hardy = {{"alpha", h.alpha},
                {"lambda", optional_number(h.lambda)},
                {"method", h.method ? json(hardy::to_string(*h.method)) : json(nullptr)},
                {"delta", optional_number(h.delta)}};
  const auto& n = cfg.numerics;
  const eigen::SolverOptions solver = config::build_solver(cfg);
  json numerics = {{"n", n.n},
                   {"grading", optional_number(n.grading)},
                   {"h", n.h},
                   {"grading_2d", n.grading_2d},
                   {"levels", n.levels},
                   {"tol", solver.tol},
                   {"max_iterations", n.max_iterations},
                   {"count", n.count},
                   {"k", n.k},
                   {"k0", n.k0},
                   {"samples", n.samples},
                   {"quadrature", n.quadrature},
                   {"elements_per_strip", n.elements_per_strip},
                   {"elements_per_strip_2d", n.elements_per_strip_2d},
                   {"boundary", spectral::to_string(n.boundary)},
                   {"mode", n.mode},
                   {"scan_resolution", n.scan_resolution},
                   {"extrapolate", n.extrapolate},
                   {"seed", n.seed}};
  json formats = json::array();
  if (cfg.output.json) formats.push_back("json");
  if (cfg.output.csv) formats.push_back("csv");
  return {{"command", cfg.command ? json(config::to_string(*cfg.command)) : json(nullptr)},
          {"domain", domain},
          {"form", form},
          {"hardy", hardy},
          {"numerics", numerics},
          {"point", cfg.point},
          {"output", {{"dir", cfg.output.dir}, {"formats", formats}}}};
}

std::string timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json envelope(const std::string& command, const std::string& status, int exit_code, bool dry_run,
              const json& config, const json& result) {
  return {{"schema", kSchemaName}, {"schema_version", kSchemaVersion},
          {"generated_at", timestamp()}, {"command", command},
          {"status", status}, {"exit_code", exit_code},
          {"dry_run", dry_run}, {"config", config},
          {"result", result}};
}

json error_report(const std::string& command, const std::string& code, const std::string& message,
                  const json& config) {
  json r = envelope(command, "ERROR", 2, false, config, nullptr);
  r["error"] = {{"code", code}, {"message", message}};
  return r;
}

std::vector<std::string> validate(const json& instance, const json& schema) {
  Validator v(schema);
  v.check(instance, schema, "");
  return v.errors;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  if (ec) fail(ErrorCode::IoError, "cannot create directory " + target.parent_path().string() + ": " + ec.message());
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    fail(ErrorCode::IoError, "cannot rename " + tmp.string() + " to " + target.string() + ": " + ec.message());
  }
}

} // namespace hardylab::report
