#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "hardylab/expr.hpp"
#include "hardylab/mesh.hpp"

namespace hardylab::forms {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Quadratic form  int a|grad u|^2 + (q + a*mode_potential) u^2  +  boundary sigma u^2.
struct FormSpec {
  CoefficientExpr diffusion = CoefficientExpr::constant(1.0);
  CoefficientExpr potential = CoefficientExpr::constant(0.0);
  /// Evaluated at Robin-tagged endpoints (1D) or Robin edge midpoints (2D).
  CoefficientExpr sigma = CoefficientExpr::constant(0.0);
  /// Potential multiplied by the diffusion, e.g. m^2/r^2 for an azimuthal mode.
  std::optional<CoefficientExpr> mode_potential;
  /// Exponent of a = d^beta when the power form is declared.
  std::optional<double> beta;
};

/// Form with a = d^beta (beta < 1) and potential q.
FormSpec power_form(double beta, const CoefficientExpr& potential = CoefficientExpr::constant(0.0));

/// Attaches the azimuthal potential of the reduction to the form.
FormSpec with_mode(FormSpec form, const mesh::AxisymmetricReduction& reduction);

struct QuadratureOptions {
  /// Gauss points per element in 1D; in 2D, values <= 4 select the
  /// 7-point degree-5 rule and larger values a collapsed n x n product rule.
  int order = 4;
};

struct Pencil {
  SparseMatrix K;
  SparseMatrix M;
  std::vector<int> dof_to_node;
  std::vector<int> node_to_dof;  // -1 for eliminated (Dirichlet) nodes
  int quadrature_order = 0;
  int points_per_element = 0;

  Eigen::Index dofs() const noexcept { return K.rows(); }
  /// Lifts a dof vector to a node vector (zero at Dirichlet nodes).
  Eigen::VectorXd to_nodes(const Eigen::VectorXd& x) const;
};

/// Evaluation context at a point of the mesh's coordinate system, with d
/// taken from the exact geometry.
EvalContext context_at(const mesh::Mesh& mesh, const geometry::Point& p);

/// K from the numerator form, M from int w u^2. Axisymmetric meshes
/// integrate against r dr dz. Throws NonpositiveDiffusion, NonpositiveWeight
/// or SingularQuadrature.
Pencil assemble_pencil(const mesh::Mesh& mesh, const FormSpec& numerator, const CoefficientExpr& denominator_weight,
                       const QuadratureOptions& quad = {});

/// int w u^2 over free dofs. With require_positive, w <= 0 at a quadrature
/// point throws NonpositiveWeight; otherwise any finite w is accepted.
SparseMatrix assemble_mass(const mesh::Mesh& mesh, const CoefficientExpr& weight, const QuadratureOptions& quad = {},
                           bool require_positive = true);

/// Sorted "row col value" lines (0-based) preceded by a "rows cols nnz" header.
void export_coordinate(std::ostream& os, const SparseMatrix& matrix);
void export_pencil(std::ostream& os, const Pencil& pencil);

/// phi1 = cos(theta), phi2 = sin(theta), theta = (pi/2) s(t),
/// t = (d - delta_in)/(delta_out - delta_in), s(t) = 3t^2 - 2t^3 clamped to [0, 1].
struct IMSPartition {
  double delta_in = 0.0;
  double delta_out = 0.0;
  std::vector<double> phi1, phi2;
  std::vector<geometry::Point> grad_phi1, grad_phi2;
};

struct ProfileValue {
  double phi1 = 1.0, phi2 = 0.0;
  geometry::Point grad_phi1 = geometry::Point::Zero();
  geometry::Point grad_phi2 = geometry::Point::Zero();
};

ProfileValue ims_profile(const geometry::Domain& domain, double delta_in, double delta_out, const geometry::Point& p);

/// Node samples of the partition. Throws DegenerateBand when the band is
/// narrower than four local element sizes.
IMSPartition ims_partition(const mesh::Mesh& mesh, double delta_in, double delta_out);

/// max over quadrature points of sum_j |lhs_j - rhs_j| for the IMS
/// identity with exact profile gradients and elementwise gradients of u.
double ims_identity_residual(const mesh::Mesh& mesh, const IMSPartition& partition, const Eigen::VectorXd& u,
                             const CoefficientExpr& a);

} // namespace hardylab::forms
