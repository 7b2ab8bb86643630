#include "hardylab/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "hardylab/errors.hpp"

namespace hardylab::eigen {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kEps = std::numeric_limits<double>::epsilon();

class ShiftedFactor {
public:
  ShiftedFactor(const SparseMatrix& K, const SparseMatrix& M) : K_(K), M_(M) {
    SparseMatrix A = K_ - M_;
    ldlt_.analyzePattern(A);
  }

  // Factors K - sigma M. Returns false when a pivot is (numerically) zero.
  bool factor(double sigma) {
    sigma_ = sigma;
    SparseMatrix A = K_ - sigma * M_;
    ldlt_.factorize(A);
    negatives_ = 0;
    if (ldlt_.info() != Eigen::Success) return false;
    const VectorXd D = ldlt_.vectorD();
    const VectorXd diag = ldlt_.permutationP() * VectorXd(A.diagonal().cwiseAbs());
    bool ok = true;
    for (Index i = 0; i < D.size(); ++i) {
      if (!std::isfinite(D[i])) return false;
      if (D[i] < 0.0) ++negatives_;
      double scale = diag[i] > 0.0 ? diag[i] : 1.0;
      if (std::abs(D[i]) <= 1e-12 * scale) ok = false;
    }
    return ok;
  }

  Index negatives() const { return negatives_; }
  double sigma() const { return sigma_; }
  VectorXd apply(const VectorXd& v) const { return ldlt_.solve(M_ * v); }

private:
  const SparseMatrix& K_;
  const SparseMatrix& M_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  Index negatives_ = 0;
  double sigma_ = 0.0;
};

double midpoint(double lo, double hi) { return std::sinh(0.5 * (std::asinh(lo) + std::asinh(hi))); }

// Largest verified shift below the spectrum: Gershgorin estimate, pushed
// down until the inertia shows no eigenvalue below it, then raised by
// bisection toward min K_ii / M_ii.
double choose_shift(ShiftedFactor& f, const SparseMatrix& K, const SparseMatrix& M, std::vector<std::string>& notes) {
  const Index n = K.rows();
  double gK = std::numeric_limits<double>::infinity();
  double GM = 0.0, minMii = std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  VectorXd kd = K.diagonal(), md = M.diagonal();
  VectorXd koff = VectorXd::Zero(n), moff = VectorXd::Zero(n);
  for (int c = 0; c < K.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(K, c); it; ++it)
      if (it.row() != it.col()) koff[it.row()] += std::abs(it.value());
  for (int c = 0; c < M.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(M, c); it; ++it)
      if (it.row() != it.col()) moff[it.row()] += std::abs(it.value());
  for (Index i = 0; i < n; ++i) {
    gK = std::min(gK, kd[i] - koff[i]);
    GM = std::max(GM, md[i] + moff[i]);
    minMii = std::min(minMii, md[i]);
    upper = std::min(upper, kd[i] / md[i]);
  }
  if (!(minMii > 0.0)) fail(ErrorCode::FactorizationFailure, "mass matrix has a non-positive diagonal entry");
  double lo = gK >= 0.0 ? gK / GM : gK / minMii;
  if (lo >= upper) lo = upper - (1.0 + std::abs(upper));

  int expansions = 0;
  while (!f.factor(lo) || f.negatives() > 0) {
    if (++expansions > 200) fail(ErrorCode::FactorizationFailure, "no shift below the spectrum was found");
    lo -= 1.0 + std::abs(lo);
  }
  double hi = upper;
  for (int step = 0; step < 60 && hi - lo > 0.01 * std::max(std::abs(lo), std::abs(hi)); ++step) {
    double mid = midpoint(lo, hi);
    if (!(mid > lo && mid < hi)) break;
    if (f.factor(mid) && f.negatives() == 0) lo = mid;
    else hi = mid;
  }
  if (expansions > 0) notes.push_back("shift lowered " + std::to_string(expansions) + " time(s) below the estimate");
  return lo;
}

VectorXd random_vector(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

// Orthogonalizes w against the first cols columns of V in the M inner
// product (two passes) and returns the M-norm of the result.
double m_orthogonalize(VectorXd& w, const MatrixXd& V, const MatrixXd& MV, Index cols, const SparseMatrix& M) {
  for (int pass = 0; pass < 2; ++pass) {
    if (cols == 0) break;
    VectorXd c = MV.leftCols(cols).transpose() * w;
    w -= V.leftCols(cols) * c;
  }
  return std::sqrt(std::max(0.0, w.dot(M * w)));
}

struct Residual {
  double value;
  double floor;
};

Residual explicit_residual(const SparseMatrix& K, const SparseMatrix& M, const SparseMatrix& absK,
                           const SparseMatrix& absM, const VectorXd& x, double lambda) {
  VectorXd Mx = M * x;
  double denom = Mx.norm();
  VectorXd r = K * x - lambda * Mx;
  VectorXd ax = x.cwiseAbs();
  VectorXd bound = absK * ax + std::abs(lambda) * (absM * ax);
  return {r.norm() / denom, 16.0 * kEps * bound.norm() / denom};
}

} // namespace

double default_tolerance(int dimension) { return dimension <= 1 ? 1e-10 : 1e-8; }

Index count_below(const SparseMatrix& K, const SparseMatrix& M, double sigma) {
  ShiftedFactor f(K, M);
  f.factor(sigma);
  return f.negatives();
}

SpectralReport smallest_eigenpairs(const SparseMatrix& K, const SparseMatrix& M, int count,
                                   const SolverOptions& options) {
  const Index n = K.rows();
  if (K.cols() != n || M.rows() != n || M.cols() != n)
    fail(ErrorCode::InvalidArgument, "pencil matrices must be square and of equal size");
  if (count < 1 || count > n) fail(ErrorCode::InvalidArgument, "requested eigenpair count must lie in [1, dofs]");
  if (!(options.tol > 0.0)) fail(ErrorCode::InvalidArgument, "tolerance must be positive");

  SpectralReport rep;
  rep.dofs = n;
  rep.tolerance = options.tol;

  ShiftedFactor f(K, M);
  double sigma = choose_shift(f, K, M, rep.notes);
  int attempts = 0;
  while (!f.factor(sigma) || f.negatives() > 0) {
    if (++attempts > 3) fail(ErrorCode::FactorizationFailure, "shifted matrix stays singular after 3 perturbations");
    sigma -= 1e-3 * (1.0 + std::abs(sigma));
  }
  rep.shift = sigma;

  SparseMatrix absK = K.cwiseAbs(), absM = M.cwiseAbs();
  const Index m = std::min<Index>(n, options.basis_size > 0 ? options.basis_size : std::max(2 * count + 20, 40));
  if (m < count) fail(ErrorCode::InvalidArgument, "basis size must be at least the requested count");

  std::mt19937_64 rng(options.seed);
  MatrixXd V(n, m + 1), MV(n, m + 1), W(n, m);
  auto set_basis = [&](Index j, VectorXd v) {
    double nrm = std::sqrt(v.dot(M * v));
    V.col(j) = v / nrm;
    MV.col(j) = M * V.col(j);
  };
  auto fresh_direction = [&](Index cols) {
    for (int tries = 0; tries < 10; ++tries) {
      VectorXd r = random_vector(n, rng);
      double before = std::sqrt(r.dot(M * r));
      double after = m_orthogonalize(r, V, MV, cols, M);
      if (after > 1e-8 * before) return r;
    }
    fail(ErrorCode::NoConvergence, "could not extend the Krylov basis");
  };
  set_basis(0, random_vector(n, rng));

  Index kept = 0;      // columns of V whose images W are known
  Index basis = 1;     // columns of V in use
  int reinjections = 0;
  std::vector<double> lambdas;
  MatrixXd Y;
  while (true) {
    Index j = kept;
    for (; j < m && rep.iterations < options.max_iterations; ++j) {
      W.col(j) = f.apply(V.col(j));
      ++rep.iterations;
      if (j + 1 == n) {
        ++j;
        break;
      }
      VectorXd w = W.col(j);
      double wnorm = std::sqrt(w.dot(M * w));
      double beta = m_orthogonalize(w, V, MV, j + 1, M);
      if (!(beta > 1e-10 * wnorm)) w = fresh_direction(j + 1);
      set_basis(j + 1, w);
      basis = j + 2;
    }
    const Index size = j;
    MatrixXd H = MV.leftCols(size).transpose() * W.leftCols(size);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
    // Largest theta <-> smallest lambda.
    const Index want = std::min<Index>(count, size);
    MatrixXd S(size, size);
    for (Index c = 0; c < size; ++c) {
      S.col(c) = es.eigenvectors().col(size - 1 - c);
    }
    // Polish: one more application of the operator damps rounding noise in
    // the high modes, then Rayleigh-Ritz with K and M themselves.
    MatrixXd Z(n, want);
    for (Index c = 0; c < want; ++c) Z.col(c) = f.apply(V.leftCols(size) * S.col(c));
    rep.iterations += static_cast<int>(want);
    MatrixXd MZ = M * Z;
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> polish(Z.transpose() * (K * Z), Z.transpose() * MZ);
    Y = Z * polish.eigenvectors();
    for (Index c = 0; c < want; ++c) Y.col(c) /= std::sqrt(Y.col(c).dot(M * Y.col(c)));
    lambdas.assign(static_cast<std::size_t>(want), 0.0);
    rep.residuals.assign(static_cast<std::size_t>(want), 0.0);
    rep.residual_floors.assign(static_cast<std::size_t>(want), 0.0);
    bool converged = want == count;
    for (Index c = 0; c < want; ++c) {
      lambdas[c] = polish.eigenvalues()[c];
      Residual r = explicit_residual(K, M, absK, absM, Y.col(c), lambdas[c]);
      rep.residuals[c] = r.value;
      rep.residual_floors[c] = r.floor;
      if (!(r.value <= std::max(options.tol, r.floor))) converged = false;
    }
    if (converged) {
      // Inertia check for eigenvalues the Krylov space missed.
      double top = lambdas.back();
      double tau = top - 1e-8 * std::max(1.0, std::abs(top));
      Index found = std::count_if(lambdas.begin(), lambdas.end(), [&](double l) { return l < tau; });
      ShiftedFactor g(K, M);
      g.factor(tau);
      if (g.negatives() <= found || size == n || reinjections >= 3) {
        if (g.negatives() > found)
          rep.notes.push_back("inertia reports " + std::to_string(g.negatives()) + " eigenvalues below " +
                              std::to_string(tau) + " but " + std::to_string(found) + " were found");
        rep.converged = g.negatives() <= found;
        break;
      }
      ++reinjections;
      rep.notes.push_back("inertia check found a missed eigenvalue; restarting with a fresh vector");
      Index p = std::min<Index>(size - 1, count);
      MatrixXd Sp = S.leftCols(p);
      MatrixXd Vn = V.leftCols(size) * Sp, Wn = W.leftCols(size) * Sp;
      V.leftCols(p) = Vn;
      W.leftCols(p) = Wn;
      MV.leftCols(p) = MV.leftCols(size) * Sp;
      set_basis(p, fresh_direction(p));
      kept = p;
      basis = p + 1;
      ++rep.restarts;
      continue;
    }
    if (rep.iterations >= options.max_iterations || size == n) {
      rep.converged = false;
      break;
    }
    // Thick restart: keep the leading Ritz vectors and the last basis vector.
    Index p = std::min<Index>(size - 1, std::max<Index>(count + 5, size / 2));
    MatrixXd Sp = S.leftCols(p);
    MatrixXd Vn = V.leftCols(size) * Sp, Wn = W.leftCols(size) * Sp, MVn = MV.leftCols(size) * Sp;
    VectorXd last = V.col(size), Mlast = MV.col(size);
    V.leftCols(p) = Vn;
    W.leftCols(p) = Wn;
    MV.leftCols(p) = MVn;
    V.col(p) = last;
    MV.col(p) = Mlast;
    kept = p;
    basis = p + 1;
    ++rep.restarts;
  }
  (void)basis;

  rep.eigenvalues = lambdas;
  rep.eigenvectors = Y;
  if (!rep.converged) rep.notes.push_back("iteration budget exhausted; results are partial");
  return rep;
}

SpectralReport smallest_eigenpairs(const forms::Pencil& pencil, int count, const SolverOptions& options) {
  return smallest_eigenpairs(pencil.K, pencil.M, count, options);
}

const SpectralReport& require_converged(const SpectralReport& report) {
  if (!report.converged) {
    std::ostringstream msg;
    msg << "eigensolver did not converge within " << report.iterations << " iterations";
    if (!report.residuals.empty())
      msg << " (worst residual " << *std::max_element(report.residuals.begin(), report.residuals.end()) << ")";
    fail(ErrorCode::NoConvergence, msg.str());
  }
  return report;
}

double smallest_eigenvalue(const forms::Pencil& pencil, const SolverOptions& options) {
  return require_converged(smallest_eigenpairs(pencil, 1, options)).eigenvalues.front();
}

CountResult counting_function(const SpectralReport& report, double lambda) {
  CountResult r;
  r.count = static_cast<std::size_t>(
      std::count_if(report.eigenvalues.begin(), report.eigenvalues.end(), [&](double v) { return v <= lambda; }));
  r.lower_bound_only = report.eigenvalues.empty() || lambda >= report.eigenvalues.back();
  return r;
}

std::string to_string(ConvergenceStatus s) {
  switch (s) {
  case ConvergenceStatus::Converged: return "Converged";
  case ConvergenceStatus::NonConvergent: return "NonConvergent";
  case ConvergenceStatus::Exact: return "Exact";
  }
  return "NonConvergent";
}

ConvergenceTable refine_and_extrapolate(const PencilRecipe& recipe, int levels, const SolverOptions& options) {
  if (levels < 3) fail(ErrorCode::InvalidArgument, "refine_and_extrapolate needs at least 3 levels");
  ConvergenceTable t;
  for (int l = 0; l < levels; ++l) {
    forms::Pencil p = recipe(l);
    t.levels.push_back({l, p.dofs(), smallest_eigenvalue(p, options)});
  }
  auto same = [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, std::max(std::abs(a), std::abs(b))); };
  bool exact = true;
  for (int l = 0; l + 1 < levels; ++l) exact = exact && same(t.levels[l].value, t.levels[l + 1].value);
  if (exact) {
    t.status = ConvergenceStatus::Exact;
    t.extrapolated = t.levels.front().value;
    t.rates.assign(levels - 2, std::numeric_limits<double>::quiet_NaN());
    return t;
  }
  for (int l = 0; l + 2 < levels; ++l) {
    double d1 = t.levels[l].value - t.levels[l + 1].value;
    double d2 = t.levels[l + 1].value - t.levels[l + 2].value;
    double ratio = d1 / d2;
    t.rates.push_back(ratio > 0.0 && std::isfinite(ratio) ? std::log2(ratio) : std::numeric_limits<double>::quiet_NaN());
  }
  const double last = t.levels.back().value, prev = t.levels[levels - 2].value;
  const double r = t.rates.back();
  if (std::isfinite(r)) t.rate = r;
  if (std::isfinite(r) && r > 0.0) {
    t.status = ConvergenceStatus::Converged;
    t.extrapolated = last + (last - prev) / (std::exp2(r) - 1.0);
  } else {
    t.status = ConvergenceStatus::NonConvergent;
    t.extrapolated = last;
  }
  return t;
}

void write_csv(std::ostream& os, const SpectralReport& report) {
  char buf[128];
  os << "index,value,residual\n";
  for (std::size_t i = 0; i < report.eigenvalues.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, report.eigenvalues[i], report.residuals[i]);
    os << buf;
  }
}

} // namespace hardylab::eigen
