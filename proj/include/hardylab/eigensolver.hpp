#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hardylab/forms.hpp"

namespace hardylab::eigen {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct SolverOptions {
  double tol = 1e-10;
  int max_iterations = 400;  // operator applications
  std::uint64_t seed = 20240917;
  /// Krylov basis size; 0 picks max(2 * count + 20, 40), capped at the dof count.
  int basis_size = 0;
};

/// Default tolerance by spatial dimension: 1e-10 in 1D, 1e-8 in 2D.
double default_tolerance(int dimension);

struct SpectralReport {
  std::vector<double> eigenvalues;   // ascending
  std::vector<double> residuals;     // |Kx - lambda Mx| / |Mx|
  /// Rounding level of each residual evaluation; a pair is accepted when its
  /// residual is below max(tol, floor).
  std::vector<double> residual_floors;
  Eigen::MatrixXd eigenvectors;      // M-orthonormal columns
  int iterations = 0;
  int restarts = 0;
  Eigen::Index dofs = 0;
  double shift = 0.0;
  double tolerance = 0.0;
  bool converged = false;
  std::string mesh;
  std::vector<std::string> notes;
};

/// The count algebraically smallest eigenpairs of K x = lambda M x by
/// shift-invert Lanczos in the M inner product with thick restarts. The
/// shift sits strictly below the smallest eigenvalue, located by inertia
/// counts of LDL^T factorizations. A report with converged = false is
/// returned when the iteration budget runs out.
SpectralReport smallest_eigenpairs(const SparseMatrix& K, const SparseMatrix& M, int count,
                                   const SolverOptions& options = {});
SpectralReport smallest_eigenpairs(const forms::Pencil& pencil, int count, const SolverOptions& options = {});

/// Throws NoConvergence unless report.converged.
const SpectralReport& require_converged(const SpectralReport& report);

/// Smallest eigenvalue, throwing NoConvergence on failure.
double smallest_eigenvalue(const forms::Pencil& pencil, const SolverOptions& options = {});

/// Number of eigenvalues of K - sigma M below zero (Sylvester inertia).
Eigen::Index count_below(const SparseMatrix& K, const SparseMatrix& M, double sigma);

struct CountResult {
  std::size_t count = 0;
  /// lambda is not below the largest computed eigenvalue, so further
  /// eigenvalues may exist at or below it.
  bool lower_bound_only = false;
};

/// #{computed eigenvalues <= lambda}.
CountResult counting_function(const SpectralReport& report, double lambda);

enum class ConvergenceStatus { Converged, NonConvergent, Exact };
std::string to_string(ConvergenceStatus s);

struct ConvergenceLevel {
  int level = 0;
  Eigen::Index dofs = 0;
  double value = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceLevel> levels;
  /// log2((v1 - v2)/(v2 - v3)) for each consecutive triple; NaN when undefined.
  std::vector<double> rates;
  std::optional<double> rate;  // from the last triple
  double extrapolated = 0.0;
  ConvergenceStatus status = ConvergenceStatus::NonConvergent;
};

using PencilRecipe = std::function<forms::Pencil(int level)>;

/// Smallest eigenvalue for level = 0 .. levels-1 of a nested family
/// (each level one uniform refinement of the previous), with the observed
/// rate and the Richardson limit v_last + (v_last - v_prev)/(2^p - 1).
ConvergenceTable refine_and_extrapolate(const PencilRecipe& recipe, int levels, const SolverOptions& options = {});

/// One row per eigenvalue: index,value,residual.
void write_csv(std::ostream& os, const SpectralReport& report);

} // namespace hardylab::eigen
