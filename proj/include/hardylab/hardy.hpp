#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hardylab/eigensolver.hpp"
#include "hardylab/forms.hpp"
#include "hardylab/geometry.hpp"

namespace hardylab::hardy {

using geometry::Domain;

/// (1 - beta)^2 / 4; throws ExponentOutOfRange for beta >= 1.
double kappa(double beta);

/// Weighted constant for the interior-diameter bound, defined for alpha > beta - 2:
/// 2^(alpha - beta) (alpha + 2 - beta)^2 on (beta - 2, -1), and
/// 2^(alpha - beta) (1 - beta)(2 alpha + 3 - beta) on [-1, inf).
double fmt_constant(double alpha, double beta);
/// Tubular-neighbourhood constant 2^(alpha-beta+1) (2 alpha - beta + 3) / (1 - beta)^(alpha - beta + 2),
/// defined for alpha > (beta - 3)/2.
double tubular_constant(double alpha, double beta);

struct HardyConstants {
  double kappa = 0.0;
  std::optional<double> c_fmt;  // absent outside its exponent range
  std::optional<double> c_tub;
};

HardyConstants hardy_constants(double alpha, double beta);

enum class Method { None, BrezisMarcus, FmtDint, AvkhadievWirths, HhlVolume, EvansLewisVolume, FmtWeighted, Tubular };

std::string to_string(Method m);
/// Accepts the snake_case names used in configuration files.
Method parse_method(const std::string& name);

inline constexpr double kAvkhadievWirthsLambda0 = 0.94;

/// n^(1 - 2/n) |S^(n-1)|^(2/n).
double volume_constant(int n);

struct HardyBoundSpec {
  double beta = 0.0;
  double alpha = 0.0;
  double kappa = 0.25;
  Method method = Method::None;
  double lambda = 0.0;
  std::optional<double> delta;       // tubular width
  std::vector<std::string> notes;    // hypotheses checked or assumed
};

struct BoundRequest {
  Method method = Method::None;
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<double> delta;  // required for Tubular
  int scan_resolution = 200;
};

/// lambda for the requested catalogue entry. Convexity is required by every
/// entry except FmtWeighted and Tubular, which instead need -Laplacian(d) >= 0
/// (on the domain, resp. the tubular neighbourhood), checked by a scan.
/// Throws MethodNotApplicable naming the failed hypothesis.
HardyBoundSpec lambda_bound(const Domain& domain, const BoundRequest& request);

inline constexpr double kCertTolerance = 1e-4;

/// Refinement ladder. Intervals use one graded mesh per entry of n_1d;
/// planar domains and tori (through the axisymmetric reduction) start from
/// a graded triangulation of size h and refine uniformly.
struct Ladder {
  std::vector<int> n_1d = {256, 1024, 4096};
  std::optional<double> grading_1d;  // default_grading_1d(n) when absent
  double h = 0.1;
  double grading_2d = 0.15;
  int levels_2d = 3;
  forms::QuadratureOptions quadrature;
  eigen::SolverOptions solver;
};

struct LadderLevel {
  int level = 0;
  Eigen::Index dofs = 0;
  double minimum = 0.0;
  double margin = 0.0;
};

enum class CertVerdict { Certified, Inconclusive };
std::string to_string(CertVerdict v);

struct HardyCertificate {
  std::string domain;
  HardyBoundSpec spec;
  std::vector<LadderLevel> levels;
  double margin = 0.0;           // finest level
  double trend_limit = 0.0;      // extrapolated margin
  double cert_tol = kCertTolerance;
  CertVerdict verdict = CertVerdict::Inconclusive;
  std::string semantics;
};

/// Pencil min [int d^b |grad u|^2 - lambda int d^a u^2] / int d^(b-2) u^2 on one mesh.
forms::Pencil hardy_pencil(const mesh::Mesh& mesh, double beta, double alpha, double lambda,
                           const forms::QuadratureOptions& quad = {});

/// Meshes of the ladder, in order.
std::vector<mesh::Mesh> ladder_meshes(const Domain& domain, const Ladder& ladder);

/// Certified iff every margin and the extrapolated trend of the margins
/// stay >= -cert_tol.
HardyCertificate verify_hardy(const Domain& domain, double beta, double alpha, double lambda,
                              const Ladder& ladder = {});

} // namespace hardylab::hardy
