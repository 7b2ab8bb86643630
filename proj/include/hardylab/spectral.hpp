#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hardylab/eigensolver.hpp"
#include "hardylab/forms.hpp"
#include "hardylab/geometry.hpp"
#include "hardylab/mesh.hpp"

namespace hardylab::spectral {

using geometry::Domain;

/// Which functions the form check ranges over on the strip {d < 1/k}.
enum class StripBoundary {
  Localized,  // vanish on the whole strip boundary (inner interface and the domain boundary)
  Restricted, // vanish on the domain boundary only; free on the inner interface
};

std::string to_string(StripBoundary b);

struct ProblemSpec {
  Domain domain = Domain::interval(0.0, 1.0);
  forms::FormSpec form;
  double gamma = 0.5;
  std::vector<int> k_values = {2, 4, 8, 16};
  int k0 = 2;

  /// Intervals: the whole-interval mesh for strip k has
  /// 2 * ceil(elements_per_strip * k * length / 2) elements, so every strip
  /// carries the same resolution relative to its width.
  int elements_per_strip = 64;
  double grading_1d = 1.0;
  /// Planar domains and tori: h_k = min(h, 1/(k * elements_per_strip_2d)).
  double h = 0.1;
  double grading_2d = 0.15;
  int elements_per_strip_2d = 8;
  int torus_mode = 0;

  forms::QuadratureOptions quadrature{};
  eigen::SolverOptions solver{};
};

/// beta of the declared power form, or 0 when a is not declared as d^beta.
double form_beta(const forms::FormSpec& form);

/// Mesh of the strip {0 < d < 1/k} following the problem's recipe.
mesh::Mesh strip_mesh(const ProblemSpec& problem, int k);
/// Full-domain mesh at the resolution used for strip k.
mesh::Mesh domain_mesh(const ProblemSpec& problem, int k);

struct PerssonEntry {
  int k = 0;
  double delta = 0.0;
  Eigen::Index dofs = 0;
  double mu = 0.0;
  double kappa_bound = 0.0;   // kappa(beta) k^(2 - beta)
  double gamma_bound = 0.0;   // gamma kappa(beta) k^(2 - beta)
};

struct PerssonSequence {
  std::vector<PerssonEntry> entries;
  std::optional<double> exponent;  // least-squares slope of log mu against log k
  double beta = 0.0;
  bool bound_applies = false;      // a = d^beta and q >= 0 on the sampled strip
};

/// mu_k = min of the form over functions supported in {d < 1/k}, vanishing
/// on the domain boundary and the inner interface, normalized by int u^2.
PerssonSequence persson_sequence(const ProblemSpec& problem);

void write_csv(std::ostream& os, const PerssonSequence& seq);

enum class Verdict { Pass, Fail };
std::string to_string(Verdict v);

inline constexpr double kPointwiseTolerance = 1e-8;
inline constexpr double kFormTolerance = 1e-4;

struct CriterionReport {
  std::string criterion;        // pointwise or form
  Verdict verdict = Verdict::Pass;
  double worst_margin = 0.0;
  geometry::Point worst_point = geometry::Point::Zero();
  double tolerance = 0.0;
  std::size_t samples = 0;
  std::vector<double> level_minima;  // form check only
  std::vector<Eigen::Index> level_dofs;
  std::string details;
};

/// The first n points of the Halton sequence in the given dimension.
std::vector<std::vector<double>> halton(std::size_t n, int dimension);

/// margin(x) = (1 - gamma)[kappa d^(beta-2) + lambda d^alpha] - q_-(x) on a
/// Halton sample of {0 < d < 1/k0}. A sample point passes when
/// margin >= -tol * (1 + |(1-gamma)[...]| + q_-), i.e. up to the rounding of
/// the two sides.
CriterionReport check_pointwise_criterion(const ProblemSpec& problem, double lambda, double alpha,
                                          std::size_t samples = 10000);

/// Minimum of [(1-gamma) int a|grad u|^2 - int q_- u^2] / int u^2 on the
/// strip {d < 1/k} over `levels` uniformly refined meshes. PASS iff every
/// level minimum is >= -kFormTolerance.
CriterionReport check_form_nonnegativity(const ProblemSpec& problem, int k, int levels = 2,
                                         StripBoundary boundary = StripBoundary::Localized);

enum class Discreteness { Discrete, Inconclusive };
std::string to_string(Discreteness d);

struct DiagnosticReport {
  Discreteness verdict = Discreteness::Inconclusive;
  std::vector<CriterionReport> stages;
  std::optional<PerssonSequence> persson;
  int failed_stage = 0;  // 1-based; 0 when every stage passed
  std::string reason;
};

struct DiagnosticOptions {
  double lambda = 0.0;
  double alpha = 0.0;
  std::size_t samples = 10000;
  int form_levels = 2;
  double exponent_slack = 0.1;
};

/// pointwise criterion -> form check at k0 -> Persson sequence. DISCRETE
/// iff both criteria pass, the fitted exponent is >= (2 - beta) - slack and
/// mu_k >= gamma kappa(beta) k^(2-beta) for every k; otherwise INCONCLUSIVE.
DiagnosticReport discreteness_diagnostic(const ProblemSpec& problem, const DiagnosticOptions& options = {});

} // namespace hardylab::spectral
