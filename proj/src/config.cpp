#include "hardylab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hardylab/errors.hpp"

namespace hardylab::config {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"command"}},
      {"domain", {"kind", "a", "b", "x0", "y0", "x1", "y1", "vertices", "center", "radius", "r_in", "r_out",
                  "axis_distance", "tube_radius"}},
      {"form", {"a", "beta", "q", "sigma", "weight", "gamma"}},
      {"hardy", {"alpha", "lambda", "method", "delta"}},
      {"numerics", {"n", "grading", "h", "grading_2d", "levels", "tol", "max_iterations", "count", "k", "k0",
                    "samples", "quadrature", "elements_per_strip", "elements_per_strip_2d", "boundary", "mode",
                    "scan_resolution", "seed", "extrapolate"}},
      {"point", {"x"}},
      {"output", {"dir", "formats"}},
  };
  return keys;
}

// "section.key" -> 1-based line, for diagnostics.
using LineMap = std::map<std::string, int>;

std::string trim(std::string s) {
  const char* ws = " \t\r";
  s.erase(0, s.find_first_not_of(ws));
  auto end = s.find_last_not_of(ws);
  s.erase(end == std::string::npos ? 0 : end + 1);
  return s;
}

class Reader {
public:
  Reader(const pt::ptree& tree, LineMap lines, std::string source)
      : tree_(tree), lines_(std::move(lines)), source_(std::move(source)) {}

  [[noreturn]] void error(const std::string& section, const std::string& key, const std::string& msg) const {
    std::string where = source_;
    auto it = lines_.find(section + "." + key);
    if (it != lines_.end()) where += ":" + std::to_string(it->second);
    fail(ErrorCode::ConfigError, where + ": [" + section + "] " + key + ": " + msg);
  }

  std::optional<std::string> text(const std::string& section, const std::string& key) const {
    auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  std::optional<double> real(const std::string& section, const std::string& key) const {
    auto t = text(section, key);
    if (!t) return std::nullopt;
    return to_real(*t, section, key);
  }

  std::optional<long long> integer(const std::string& section, const std::string& key) const {
    auto t = text(section, key);
    if (!t) return std::nullopt;
    return to_integer(*t, section, key);
  }

  std::optional<bool> boolean(const std::string& section, const std::string& key) const {
    auto t = text(section, key);
    if (!t) return std::nullopt;
    if (*t == "true" || *t == "yes" || *t == "1") return true;
    if (*t == "false" || *t == "no" || *t == "0") return false;
    error(section, key, "expected true or false, got '" + *t + "'");
  }

  std::vector<std::string> list(const std::string& text, char sep) const {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  double to_real(const std::string& t, const std::string& section, const std::string& key) const {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
      error(section, key, "expected a number, got '" + t + "'");
    return v;
  }

  long long to_integer(const std::string& t, const std::string& section, const std::string& key) const {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
      error(section, key, "expected an integer, got '" + t + "'");
    return v;
  }

  std::vector<double> reals(const std::string& t, const std::string& section, const std::string& key) const {
    std::vector<double> out;
    std::istringstream ss(t);
    std::string tok;
    while (ss >> tok) out.push_back(to_real(tok, section, key));
    return out;
  }

  const pt::ptree& tree() const { return tree_; }

private:
  const pt::ptree& tree_;
  LineMap lines_;
  std::string source_;
};

LineMap scan_lines(const std::string& text) {
  LineMap lines;
  std::istringstream in(text);
  std::string line, section;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    line = trim(line);
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      lines.emplace(section, no);
      continue;
    }
    auto eq = line.find('=');
    if (eq != std::string::npos) lines.emplace(section + "." + trim(line.substr(0, eq)), no);
  }
  return lines;
}

geometry::Vec2 vec2(const Reader& r, const std::string& key) {
  auto t = r.text("domain", key);
  if (!t) r.error("domain", key, "missing");
  auto v = r.reals(*t, "domain", key);
  if (v.size() != 2) r.error("domain", key, "expected two numbers 'x y'");
  return {v[0], v[1]};
}

double required(const Reader& r, const std::string& section, const std::string& key) {
  auto v = r.real(section, key);
  if (!v) r.error(section, key, "missing");
  return *v;
}

DomainConfig read_domain(const Reader& r) {
  DomainConfig dc;
  auto kind = r.text("domain", "kind");
  if (!kind) r.error("domain", "kind", "missing");
  dc.kind = *kind;
  try {
    if (dc.kind == "interval") {
      dc.domain = geometry::Domain::interval(required(r, "domain", "a"), required(r, "domain", "b"));
    } else if (dc.kind == "rectangle") {
      dc.domain = geometry::Domain::rectangle(required(r, "domain", "x0"), required(r, "domain", "y0"),
                                              required(r, "domain", "x1"), required(r, "domain", "y1"));
    } else if (dc.kind == "polygon") {
      auto t = r.text("domain", "vertices");
      if (!t) r.error("domain", "vertices", "missing");
      std::vector<geometry::Vec2> verts;
      for (const auto& item : r.list(*t, ';')) {
        auto v = r.reals(item, "domain", "vertices");
        if (v.size() != 2) r.error("domain", "vertices", "each vertex is 'x y', separated by ';'");
        verts.emplace_back(v[0], v[1]);
      }
      dc.domain = geometry::Domain::polygon(std::move(verts));
    } else if (dc.kind == "disc") {
      dc.domain = geometry::Domain::disc(vec2(r, "center"), required(r, "domain", "radius"));
    } else if (dc.kind == "annulus") {
      dc.domain = geometry::Domain::annulus(vec2(r, "center"), required(r, "domain", "r_in"),
                                            required(r, "domain", "r_out"));
    } else if (dc.kind == "torus") {
      dc.domain = geometry::Domain::torus(required(r, "domain", "axis_distance"), required(r, "domain", "tube_radius"));
    } else {
      r.error("domain", "kind", "unknown domain kind '" + dc.kind + "'");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    r.error("domain", "kind", e.what());
  }
  return dc;
}

void check_expr(const Reader& r, const std::string& key, const std::string& text) {
  try {
    (void)forms::CoefficientExpr::parse(text);
  } catch (const ParseError& e) {
    r.error("form", key, "cannot parse '" + text + "' at offset " + std::to_string(e.offset()) + ": " + e.what());
  }
}

} // namespace

std::string to_string(Command c) {
  switch (c) {
  case Command::Distance: return "distance";
  case Command::Hardy: return "hardy";
  case Command::Spectrum: return "spectrum";
  case Command::Persson: return "persson";
  case Command::Criteria: return "criteria";
  case Command::Diagnose: return "diagnose";
  }
  return "distance";
}

std::optional<Command> parse_command(const std::string& name) {
  for (Command c : {Command::Distance, Command::Hardy, Command::Spectrum, Command::Persson, Command::Criteria,
                    Command::Diagnose})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

void set_formats(OutputConfig& out, const std::string& list) {
  out.json = out.csv = false;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item == "json") out.json = true;
    else if (item == "csv") out.csv = true;
    else if (!item.empty()) fail(ErrorCode::ConfigError, "unknown output format '" + item + "' (json, csv)");
  }
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();

  // '#' comments are accepted alongside ';'.
  std::string normalized;
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      std::string t = trim(line);
      normalized += (!t.empty() && t[0] == '#') ? ";" : line;
      normalized += '\n';
    }
  }

  pt::ptree tree;
  try {
    std::istringstream is(normalized);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::ConfigError, source + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  Reader r(tree, scan_lines(text), source);
  const auto& keys = known_keys();
  for (const auto& [section, body] : tree) {
    auto it = keys.find(section);
    if (it == keys.end()) {
      if (body.empty()) r.error(section, "", "key outside any section");
      r.error(section, "", "unknown section");
    }
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) r.error(section, key, "unknown key");
  }

  RunConfig cfg;
  if (auto c = r.text("run", "command")) {
    cfg.command = parse_command(*c);
    if (!cfg.command) r.error("run", "command", "unknown command '" + *c + "'");
  }
  cfg.domain = read_domain(r);

  auto& f = cfg.form;
  if (auto v = r.text("form", "a")) f.a = *v;
  f.beta = r.real("form", "beta");
  if (f.beta && !(*f.beta < 1.0)) r.error("form", "beta", "must be < 1");
  if (auto v = r.text("form", "q")) f.q = *v;
  if (auto v = r.text("form", "sigma")) f.sigma = *v;
  if (auto v = r.text("form", "weight")) f.weight = *v;
  if (auto v = r.real("form", "gamma")) f.gamma = *v;
  if (!(f.gamma > 0.0 && f.gamma < 1.0)) r.error("form", "gamma", "must lie in (0, 1)");
  if (!f.a.empty()) check_expr(r, "a", f.a);
  check_expr(r, "q", f.q);
  check_expr(r, "sigma", f.sigma);
  check_expr(r, "weight", f.weight);

  auto& hc = cfg.hardy;
  if (auto v = r.real("hardy", "alpha")) hc.alpha = *v;
  hc.lambda = r.real("hardy", "lambda");
  if (hc.lambda && !(*hc.lambda >= 0.0)) r.error("hardy", "lambda", "must be >= 0");
  if (auto m = r.text("hardy", "method")) {
    try {
      hc.method = hardy::parse_method(*m);
    } catch (const Error& e) {
      r.error("hardy", "method", e.what());
    }
  }
  if (hc.lambda && hc.method) r.error("hardy", "method", "give either lambda or method, not both");
  hc.delta = r.real("hardy", "delta");

  auto& nc = cfg.numerics;
  auto positive_int = [&](const std::string& key, int& dst, int min) {
    if (auto v = r.integer("numerics", key)) {
      if (*v < min) r.error("numerics", key, "must be >= " + std::to_string(min));
      dst = static_cast<int>(*v);
    }
  };
  positive_int("levels", nc.levels, 1);
  if (auto t = r.text("numerics", "n")) {
    nc.n.clear();
    for (const auto& item : r.list(*t, ',')) {
      long long v = r.to_integer(item, "numerics", "n");
      if (v < 2 || v % 2 != 0) r.error("numerics", "n", "element counts must be even and >= 2");
      nc.n.push_back(static_cast<int>(v));
    }
    if (nc.n.empty()) r.error("numerics", "n", "empty list");
    if (r.text("numerics", "levels") && static_cast<int>(nc.n.size()) != nc.levels)
      r.error("numerics", "levels", "disagrees with the length of n");
    nc.levels = static_cast<int>(nc.n.size());
  } else {
    nc.n.clear();
    for (int l = 0, n = 256; l < nc.levels; ++l, n *= 4) nc.n.push_back(n);
  }
  nc.grading = r.real("numerics", "grading");
  if (nc.grading && !(*nc.grading > 0.0 && *nc.grading <= 1.0)) r.error("numerics", "grading", "must lie in (0, 1]");
  if (auto v = r.real("numerics", "h")) {
    if (!(*v > 0.0)) r.error("numerics", "h", "must be > 0");
    nc.h = *v;
  }
  if (auto v = r.real("numerics", "grading_2d")) {
    if (!(*v > 0.0 && *v <= 1.0)) r.error("numerics", "grading_2d", "must lie in (0, 1]");
    nc.grading_2d = *v;
  }
  nc.tol = r.real("numerics", "tol");
  if (nc.tol && !(*nc.tol > 0.0)) r.error("numerics", "tol", "must be > 0");
  positive_int("max_iterations", nc.max_iterations, 1);
  positive_int("count", nc.count, 1);
  if (auto t = r.text("numerics", "k")) {
    nc.k.clear();
    auto parts = r.list(*t, ',');
    if (parts.size() == 1 && parts[0].find("..") != std::string::npos) {
      auto dots = parts[0].find("..");
      long long lo = r.to_integer(trim(parts[0].substr(0, dots)), "numerics", "k");
      long long hi = r.to_integer(trim(parts[0].substr(dots + 2)), "numerics", "k");
      if (lo < 1 || hi < lo) r.error("numerics", "k", "range must be 1 <= lo <= hi");
      for (long long k = lo; k <= hi; ++k) nc.k.push_back(static_cast<int>(k));
    } else {
      for (const auto& p : parts) {
        long long v = r.to_integer(p, "numerics", "k");
        if (v < 1) r.error("numerics", "k", "values must be >= 1");
        nc.k.push_back(static_cast<int>(v));
      }
    }
    if (nc.k.empty()) r.error("numerics", "k", "empty list");
  }
  positive_int("k0", nc.k0, 1);
  if (auto v = r.integer("numerics", "samples")) {
    if (*v < 1) r.error("numerics", "samples", "must be >= 1");
    nc.samples = static_cast<std::size_t>(*v);
  }
  positive_int("quadrature", nc.quadrature, 1);
  positive_int("elements_per_strip", nc.elements_per_strip, 4);
  positive_int("elements_per_strip_2d", nc.elements_per_strip_2d, 1);
  if (auto b = r.text("numerics", "boundary")) {
    if (*b == "localized") nc.boundary = spectral::StripBoundary::Localized;
    else if (*b == "restricted") nc.boundary = spectral::StripBoundary::Restricted;
    else r.error("numerics", "boundary", "expected localized or restricted");
  }
  if (auto v = r.integer("numerics", "mode")) {
    if (*v < 0) r.error("numerics", "mode", "must be >= 0");
    nc.mode = static_cast<int>(*v);
  }
  positive_int("scan_resolution", nc.scan_resolution, 0);
  if (auto t = r.text("numerics", "seed")) {
    std::uint64_t s = 0;
    auto [ptr, ec] = std::from_chars(t->data(), t->data() + t->size(), s);
    if (ec != std::errc() || ptr != t->data() + t->size()) r.error("numerics", "seed", "expected an unsigned integer");
    nc.seed = s;
  }
  if (auto v = r.boolean("numerics", "extrapolate")) nc.extrapolate = *v;

  if (auto t = r.text("point", "x")) {
    cfg.point = r.reals(*t, "point", "x");
    if (cfg.point.empty() || cfg.point.size() > 3) r.error("point", "x", "expected 1 to 3 coordinates");
  }

  if (auto v = r.text("output", "dir")) cfg.output.dir = *v;
  if (auto v = r.text("output", "formats")) {
    try {
      set_formats(cfg.output, *v);
    } catch (const Error& e) {
      r.error("output", "formats", e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, path + ": cannot open config file");
  return parse_config(in, path);
}

forms::FormSpec build_form(const RunConfig& cfg) {
  const auto& f = cfg.form;
  forms::FormSpec form;
  if (!f.a.empty()) form.diffusion = forms::CoefficientExpr::parse(f.a);
  else if (f.beta) form.diffusion = forms::CoefficientExpr::distance_power(*f.beta);
  form.beta = f.beta;
  form.potential = forms::CoefficientExpr::parse(f.q);
  form.sigma = forms::CoefficientExpr::parse(f.sigma);
  return form;
}

eigen::SolverOptions build_solver(const RunConfig& cfg) {
  eigen::SolverOptions s;
  s.tol = cfg.numerics.tol.value_or(eigen::default_tolerance(cfg.domain.domain.dimension()));
  s.max_iterations = cfg.numerics.max_iterations;
  s.seed = cfg.numerics.seed;
  return s;
}

spectral::ProblemSpec build_problem(const RunConfig& cfg) {
  spectral::ProblemSpec p{.domain = cfg.domain.domain, .form = build_form(cfg)};
  const auto& nc = cfg.numerics;
  p.gamma = cfg.form.gamma;
  p.k_values = nc.k;
  p.k0 = nc.k0;
  p.elements_per_strip = nc.elements_per_strip;
  p.grading_1d = nc.grading.value_or(1.0);
  p.h = nc.h;
  p.grading_2d = nc.grading_2d;
  p.elements_per_strip_2d = nc.elements_per_strip_2d;
  p.torus_mode = nc.mode;
  p.quadrature.order = nc.quadrature;
  p.solver = build_solver(cfg);
  return p;
}

hardy::Ladder build_ladder(const RunConfig& cfg) {
  hardy::Ladder l;
  const auto& nc = cfg.numerics;
  l.n_1d = nc.n;
  l.grading_1d = nc.grading;
  l.h = nc.h;
  l.grading_2d = nc.grading_2d;
  l.levels_2d = nc.levels;
  l.quadrature.order = nc.quadrature;
  l.solver = build_solver(cfg);
  return l;
}

} // namespace hardylab::config
