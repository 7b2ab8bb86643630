// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "hardylab/eigensolver.hpp"
#include "hardylab/errors.hpp"
#include "hardylab/forms.hpp"
#include "hardylab/geometry.hpp"
#include "hardylab/hardy.hpp"
#include "hardylab/mesh.hpp"
#include "hardylab/spectral.hpp"
#include "oracles.hpp"

using namespace hardylab;
using forms::CoefficientExpr;
using geometry::Domain;

namespace {

const double pi = std::numbers::pi;

struct Check {
  bool ok = true;
  std::ostringstream notes;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& title, double budget_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.notes << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    c.ok = false;
    c.notes << " [over budget " << budget_s << " s]";
  }
  if (!c.ok) ++failures;
  std::printf("%s criterion %d: %s (%.2f s)%s\n", c.ok ? "PASS" : "FAIL", id, title.c_str(), secs, c.notes.str().c_str());
  std::fflush(stdout);
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

spectral::ProblemSpec interval_problem(double beta, const std::string& q, double gamma = 0.5) {
  spectral::ProblemSpec p;
  p.domain = Domain::interval(0, 1);
  p.form = forms::power_form(beta, CoefficientExpr::parse(q));
  p.gamma = gamma;
  return p;
}

} // namespace

int main() {
  const Domain unit = Domain::interval(0, 1);
  const Domain disc = Domain::disc({0, 0}, 1);

  criterion(1, "constants table", 1.0, [](Check& c) {
    c.require(hardy::kappa(0.0) == 0.25, "kappa(0) = 0.25");
    c.require(close(hardy::fmt_constant(0, 0), 3.0, 1e-12), "C_fmt(0,0) = 3");
    c.require(close(hardy::fmt_constant(-1, 0), 0.5, 1e-12), "C_fmt(-1,0) = 0.5");
    // left branch (alpha + 2 - beta)^2 2^(alpha - beta) evaluated at alpha = -1
    c.require(close(std::exp2(-1.0) * 1.0, hardy::fmt_constant(-1, 0), 1e-12), "branches agree at alpha = -1");
    c.require(close(hardy::tubular_constant(0, 0), 6.0, 1e-12), "C_tub(0,0) = 6");
    c.notes << " kappa=0.25 C_fmt(0,0)=" << hardy::fmt_constant(0, 0) << " C_tub(0,0)=" << hardy::tubular_constant(0, 0);
  });

  criterion(2, "lambda catalogue", 1.0, [&](Check& c) {
    auto lam = [](const Domain& d, hardy::Method m) { return hardy::lambda_bound(d, {m, 0.0, 0.0, {}, 100}).lambda; };
    c.require(close(lam(unit, hardy::Method::BrezisMarcus), 0.25, 1e-12), "brezis_marcus = 0.25");
    c.require(close(lam(unit, hardy::Method::FmtDint), 3.0, 1e-12), "fmt_dint = 3");
    c.require(close(lam(unit, hardy::Method::AvkhadievWirths), 3.76, 1e-12), "avkhadiev_wirths = 3.76");
    c.require(close(lam(disc, hardy::Method::HhlVolume), 0.5, 1e-12), "hhl_volume = 0.5");
    c.require(close(lam(disc, hardy::Method::EvansLewisVolume), 3.0, 1e-12), "evans_lewis_volume = 3");
    c.require(close(lam(unit, hardy::Method::FmtWeighted), lam(unit, hardy::Method::FmtDint), 1e-12),
              "fmt_weighted(0,0) = fmt_dint");
  });

  criterion(3, "classical Hardy certification on (0,1)", 30.0, [&](Check& c) {
    auto cert = hardy::verify_hardy(unit, 0.0, 0.0, 0.0);
    c.notes << " minima";
    for (std::size_t i = 0; i < cert.levels.size(); ++i) {
      const double m = cert.levels[i].minimum;
      c.notes << ' ' << m;
      c.require(m >= 0.25 - 1e-4, "minimum >= 0.25 - 1e-4");
      if (i > 0) c.require(m < cert.levels[i - 1].minimum, "minima decrease");
    }
    auto fmt = hardy::verify_hardy(unit, 0.0, 0.0, 3.0);
    for (const auto& l : fmt.levels) c.require(l.margin >= -1e-4, "margin with lambda = 3");
    c.notes << "; lambda=3 margin " << fmt.margin;
  });

  criterion(4, "weighted Hardy beta = 0.5", 30.0, [&](Check& c) {
    auto cert = hardy::verify_hardy(unit, 0.5, 0.0, 0.0);
    c.notes << " minima";
    for (const auto& l : cert.levels) {
      c.notes << ' ' << l.minimum;
      c.require(l.minimum >= 0.0625 - 1e-4, "minimum >= kappa(0.5) - 1e-4");
    }
  });

  criterion(5, "torus geometry", 10.0, [](Check& c) {
    auto good = geometry::superharmonicity_scan(Domain::torus(3, 1), geometry::ScanRegion::full(), 200);
    auto bad = geometry::superharmonicity_scan(Domain::torus(1.8, 1), geometry::ScanRegion::full(), 200);
    c.require(good.verdict == geometry::Verdict::Pass, "(3,1) scan PASS");
    c.require(close(good.min_value, 0.5, 1e-3), "(3,1) min -Laplacian d = 0.5 +- 1e-3");
    c.require(bad.verdict == geometry::Verdict::Fail, "(1.8,1) scan FAIL");
    c.notes << " min(3,1)=" << good.min_value << " min(1.8,1)=" << bad.min_value;

    const Domain torus = Domain::torus(3, 1);
    const double h = 1e-3;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1, 1), ang(0, 2 * pi);
    double worst = 0.0;
    for (int tested = 0; tested < 1000;) {
      double s = u(rng), t = u(rng), theta = ang(rng);
      double rho = std::hypot(s, t);
      if (rho >= 0.95 || rho <= 0.05) continue;
      geometry::Point p((3 + s) * std::cos(theta), (3 + s) * std::sin(theta), t);
      double lap = 0.0;
      for (int i = 0; i < 3; ++i) {
        auto at = [&](double m) {
          geometry::Point q = p;
          q[i] += m * h;
          return oracle::torus_distance(3, 1, q.x(), q.y(), q.z());
        };
        lap += (-at(2) + 16 * at(1) - 30 * at(0) + 16 * at(-1) - at(-2)) / (12 * h * h);
      }
      worst = std::max(worst, std::abs(geometry::distance_calculus(torus, p, 1e-4).neg_laplacian + lap));
      ++tested;
    }
    c.require(worst <= 1e-5, "closed form vs differences <= 1e-5");
    c.notes << " fd gap " << worst;
  });

  criterion(6, "Persson exhaustion", 120.0, [](Check& c) {
    auto lap = interval_problem(0.0, "0");
    lap.k_values = {2, 4, 8};
    for (const auto& e : spectral::persson_sequence(lap).entries) {
      const double exact = pi * pi * e.k * e.k;
      c.require(std::abs(e.mu - exact) <= 1e-3 * exact, "mu_" + std::to_string(e.k) + " = pi^2 k^2");
    }
    auto w = interval_problem(0.5, "0");
    w.k_values.clear();
    for (int k = 2; k <= 16; ++k) w.k_values.push_back(k);
    auto seq = spectral::persson_sequence(w);
    for (std::size_t i = 0; i < seq.entries.size(); ++i) {
      const auto& e = seq.entries[i];
      c.require(e.mu >= 0.0625 * std::pow(e.k, 1.5), "mu_k >= 0.0625 k^1.5 at k = " + std::to_string(e.k));
      if (i > 0) c.require(e.mu >= seq.entries[i - 1].mu, "mu_k non-decreasing at k = " + std::to_string(e.k));
    }
    c.require(seq.exponent && *seq.exponent >= 1.4, "fitted exponent >= 1.4");
    if (seq.exponent) c.notes << " exponent " << *seq.exponent;
  });

  criterion(7, "sub/supercritical dichotomy", 120.0, [](Check& c) {
    auto sub = spectral::check_form_nonnegativity(interval_problem(0.0, "-0.125*d^-2"), 2, 3);
    auto sup = spectral::check_form_nonnegativity(interval_problem(0.0, "-0.3*d^-2"), 2, 3);
    c.require(sub.verdict == spectral::Verdict::Pass, "q = -0.125 d^-2 PASS");
    c.require(sup.verdict == spectral::Verdict::Fail, "q = -0.3 d^-2 FAIL");
    c.require(sup.level_minima.size() == 3 && sup.level_minima.back() < 0 &&
                  std::abs(sup.level_minima.back()) > 10 * std::abs(sup.level_minima.front()),
              "supercritical minima fall by a factor > 10");
    c.notes << " sub " << sub.details << "; super " << sup.details;
  });

  criterion(8, "discreteness diagnostic end to end", 180.0, [](Check& c) {
    auto good = interval_problem(0.5, "-0.03*d^-1.5");
    good.k_values = {2, 4, 8, 16, 32};
    auto rg = spectral::discreteness_diagnostic(good);
    c.require(rg.verdict == spectral::Discreteness::Discrete, "q = -0.03 d^-1.5 DISCRETE");
    auto bad = interval_problem(0.5, "-0.2*d^-1.5");
    bad.k_values = good.k_values;
    auto rb = spectral::discreteness_diagnostic(bad);
    c.require(rb.verdict == spectral::Discreteness::Inconclusive && rb.failed_stage == 1,
              "q = -0.2 d^-1.5 INCONCLUSIVE at stage 1");
    c.notes << " " << rg.reason << "; " << rb.reason;
  });

  criterion(9, "solver sanity", 60.0, [&](Check& c) {
    auto p = forms::assemble_pencil(mesh::build_mesh_1d(unit, 2000, 1.0), forms::FormSpec{},
                                    CoefficientExpr::constant(1.0));
    auto r = eigen::require_converged(eigen::smallest_eigenpairs(p, 5));
    for (int k = 1; k <= 5; ++k) {
      const double exact = k * k * pi * pi;
      c.require(std::abs(r.eigenvalues[k - 1] - exact) <= 1e-4 * exact, "1D eigenvalue " + std::to_string(k));
    }
    const double reference = oracle::disc_first_eigenvalue();
    auto q = forms::assemble_pencil(mesh::build_trimesh(disc, 0.02), forms::FormSpec{}, CoefficientExpr::constant(1.0));
    const double lambda1 = eigen::smallest_eigenvalue(q);
    c.require(std::abs(lambda1 - reference) <= 0.01 * reference, "disc within 1% of j01^2");
    c.notes << " disc " << lambda1 << " vs " << reference << " (" << q.dofs() << " dofs)";
  });

  criterion(10, "IMS identity", 5.0, [&](Check& c) {
    mesh::Mesh m = mesh::build_mesh_1d(unit, 64, 1.0);
    auto part = forms::ims_partition(m, 0.1, 0.3);
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd u(65);
      for (int i = 0; i < 65; ++i) u[i] = g(rng);
      u[0] = u[64] = 0.0;
      worst = std::max(worst, forms::ims_identity_residual(m, part, u, CoefficientExpr::constant(1.0)));
    }
    c.require(worst <= 1e-10, "residual <= 1e-10");
    c.notes << " worst residual " << worst;
  });

  std::printf("%s: %d of 10 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
