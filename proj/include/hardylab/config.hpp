#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hardylab/expr.hpp"
#include "hardylab/geometry.hpp"
#include "hardylab/hardy.hpp"
#include "hardylab/spectral.hpp"

namespace hardylab::config {

enum class Command { Distance, Hardy, Spectrum, Persson, Criteria, Diagnose };

std::string to_string(Command c);
std::optional<Command> parse_command(const std::string& name);

struct DomainConfig {
  std::string kind;
  geometry::Domain domain = geometry::Domain::interval(0.0, 1.0);
};

struct FormConfig {
  std::string a;                  // diffusion expression (defaults to d^beta or 1)
  std::optional<double> beta;
  std::string q = "0";
  std::string sigma = "0";
  std::string weight = "1";       // denominator weight for `spectrum`
  double gamma = 0.5;
};

struct HardyConfig {
  double alpha = 0.0;
  std::optional<double> lambda;
  std::optional<hardy::Method> method;
  std::optional<double> delta;
};

struct NumericsConfig {
  std::vector<int> n = {256, 1024, 4096};
  std::optional<double> grading;  // 1D grading; default per n
  double h = 0.1;
  double grading_2d = 0.15;
  int levels = 3;
  std::optional<double> tol;
  int max_iterations = 400;
  int count = 5;
  std::vector<int> k = {2, 4, 8, 16};
  int k0 = 2;
  std::size_t samples = 10000;
  int quadrature = 4;
  int elements_per_strip = 64;
  int elements_per_strip_2d = 8;
  spectral::StripBoundary boundary = spectral::StripBoundary::Localized;
  int mode = 0;
  int scan_resolution = 0;
  bool extrapolate = false;
  std::uint64_t seed = 20240917;
};

struct OutputConfig {
  std::string dir = ".";
  bool json = true;
  bool csv = false;
};

struct RunConfig {
  std::optional<Command> command;
  DomainConfig domain;
  FormConfig form;
  HardyConfig hardy;
  NumericsConfig numerics;
  std::vector<double> point;
  OutputConfig output;
};

/// Sectioned key = value text (INI). Unknown sections or keys, malformed
/// values and expressions that do not parse raise ConfigError naming the
/// line or the [section] key.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Parses "json,csv"-style format lists into the output block.
void set_formats(OutputConfig& out, const std::string& list);

/// Built objects shared by the pipelines.
forms::FormSpec build_form(const RunConfig& cfg);
spectral::ProblemSpec build_problem(const RunConfig& cfg);
hardy::Ladder build_ladder(const RunConfig& cfg);
eigen::SolverOptions build_solver(const RunConfig& cfg);

} // namespace hardylab::config
