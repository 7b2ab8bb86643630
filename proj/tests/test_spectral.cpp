#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hardylab/errors.hpp"
#include "hardylab/hardy.hpp"
#include "hardylab/spectral.hpp"
#include "oracles.hpp"

using namespace hardylab;
using namespace hardylab::spectral;
using forms::CoefficientExpr;

namespace {

const double pi2 = std::numbers::pi * std::numbers::pi;

ProblemSpec interval_problem(double beta, const std::string& q, double gamma = 0.5) {
  ProblemSpec p;
  p.domain = geometry::Domain::interval(0, 1);
  p.form = beta == 0.0 ? forms::FormSpec{} : forms::power_form(beta);
  if (beta == 0.0) p.form.beta = 0.0;
  p.form.potential = CoefficientExpr::parse(q);
  p.gamma = gamma;
  return p;
}

} // namespace

TEST(Persson, LaplacianStrips) {
  auto p = interval_problem(0.0, "0");
  p.k_values = {2, 4, 8};
  auto seq = persson_sequence(p);
  ASSERT_EQ(seq.entries.size(), 3u);
  for (const auto& e : seq.entries) {
    double exact = pi2 * e.k * e.k;
    EXPECT_NEAR(e.mu, exact, 1e-3 * exact) << "k = " << e.k;
    EXPECT_DOUBLE_EQ(e.delta, 1.0 / e.k);
  }
  EXPECT_TRUE(seq.bound_applies);
}

TEST(Persson, ExponentRecovery) {
  auto p = interval_problem(0.0, "0");
  p.k_values = {2, 3, 4, 6, 8, 12, 16};
  auto seq = persson_sequence(p);
  ASSERT_TRUE(seq.exponent.has_value());
  EXPECT_GE(*seq.exponent, 1.95);
  EXPECT_LE(*seq.exponent, 2.05);
}

TEST(Persson, WeightedStripBound) {
  auto p = interval_problem(0.5, "0");
  p.k_values = {2, 3, 4, 5, 6, 8, 10, 12, 16};
  auto seq = persson_sequence(p);
  EXPECT_TRUE(seq.bound_applies);
  for (std::size_t i = 0; i < seq.entries.size(); ++i) {
    const auto& e = seq.entries[i];
    EXPECT_NEAR(e.kappa_bound, 0.0625 * std::pow(e.k, 1.5), 1e-12);
    EXPECT_GE(e.mu, e.kappa_bound - 1e-8);
    if (i > 0) EXPECT_GE(e.mu, seq.entries[i - 1].mu - 1e-8);
  }
  EXPECT_GE(seq.entries[2].mu, 0.5);  // k = 4
}

TEST(Persson, StripsDominateWholeDomain) {
  auto p = interval_problem(0.0, "1 + x");
  p.k_values = {2, 4, 8};
  auto seq = persson_sequence(p);
  auto whole = forms::assemble_pencil(domain_mesh(p, 2), p.form, CoefficientExpr::constant(1.0));
  double full = eigen::smallest_eigenvalue(whole);
  for (const auto& e : seq.entries) EXPECT_GE(e.mu, full - 1e-8);
}

TEST(Persson, NegativePotentialDropsBound) {
  auto p = interval_problem(0.0, "-1");
  p.k_values = {2, 4};
  EXPECT_FALSE(persson_sequence(p).bound_applies);
}

TEST(Persson, CsvColumns) {
  auto p = interval_problem(0.0, "0");
  p.k_values = {2, 4};
  std::ostringstream os;
  write_csv(os, persson_sequence(p));
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "k,delta,dofs,mu,bound,gamma_bound");
  std::string row;
  std::getline(is, row);
  EXPECT_EQ(row.substr(0, 6), "2,0.5,");
}

TEST(Persson, RejectsBadRange) {
  auto p = interval_problem(0.0, "0");
  p.k_values = {4, 2};
  EXPECT_THROW(persson_sequence(p), Error);
}

TEST(Halton, FirstPoints) {
  auto h = halton(3, 2);
  EXPECT_DOUBLE_EQ(h[0][0], 0.5);
  EXPECT_DOUBLE_EQ(h[1][0], 0.25);
  EXPECT_DOUBLE_EQ(h[2][0], 0.75);
  EXPECT_NEAR(h[0][1], 1.0 / 3, 1e-15);
  EXPECT_NEAR(h[1][1], 2.0 / 3, 1e-15);
  EXPECT_NEAR(h[2][1], 1.0 / 9, 1e-15);
  EXPECT_THROW(halton(2, 0), Error);
}

TEST(Pointwise, SubcriticalPasses) {
  auto r = check_pointwise_criterion(interval_problem(0.0, "-0.1*d^-2"), 0, 0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_GT(r.worst_margin, 0.0);
  EXPECT_EQ(r.criterion, "pointwise");
  EXPECT_GT(r.samples, 1000u);
}

TEST(Pointwise, SupercriticalFails) {
  auto r = check_pointwise_criterion(interval_problem(0.0, "-0.2*d^-2"), 0, 0);
  EXPECT_EQ(r.verdict, Verdict::Fail);
  auto w = check_pointwise_criterion(interval_problem(0.5, "-0.125*d^-1.5"), 0, 0);
  EXPECT_EQ(w.verdict, Verdict::Fail);
}

TEST(Pointwise, ThresholdIsExact) {
  // (1 - gamma) kappa(0.5) = 0.03125
  EXPECT_EQ(check_pointwise_criterion(interval_problem(0.5, "-0.03125*d^-1.5"), 0, 0).verdict, Verdict::Pass);
  EXPECT_EQ(check_pointwise_criterion(interval_problem(0.5, "-0.0313*d^-1.5"), 0, 0).verdict, Verdict::Fail);
}

TEST(Pointwise, LambdaTermHelps) {
  auto p = interval_problem(0.0, "-0.125*d^-2 - 1");
  EXPECT_EQ(check_pointwise_criterion(p, 0, 0).verdict, Verdict::Fail);
  EXPECT_EQ(check_pointwise_criterion(p, 3, 0).verdict, Verdict::Pass);
}

TEST(Pointwise, Deterministic) {
  auto p = interval_problem(0.0, "-0.2*d^-2");
  auto a = check_pointwise_criterion(p, 0, 0), b = check_pointwise_criterion(p, 0, 0);
  EXPECT_EQ(a.worst_margin, b.worst_margin);
  EXPECT_EQ(a.worst_point, b.worst_point);
}

TEST(FormCheck, CriticalHardyPasses) {
  auto r = check_form_nonnegativity(interval_problem(0.0, "-0.125*d^-2"), 2, 3);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  ASSERT_EQ(r.level_minima.size(), 3u);
  for (double m : r.level_minima) EXPECT_GE(m, -kFormTolerance);

  // independent Sturm solve on (0, 1/2) with Dirichlet ends, n = 3000
  std::vector<double> x(3001);
  for (int i = 0; i <= 3000; ++i) x[i] = 0.5 * i / 3000.0;
  auto t = oracle::p1_pencil(x, [](double) { return 0.5; }, [](double s) { return -0.125 / (s * s); },
                             [](double) { return 1.0; });
  EXPECT_GE(oracle::sturm_eigenvalue(t, 0, -10.0, 100.0), -kFormTolerance);
}

TEST(FormCheck, NoNegativePartPasses) {
  auto r = check_form_nonnegativity(interval_problem(0.0, "0"), 2, 2);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_GT(r.worst_margin, 0.0);
}

TEST(FormCheck, SupercriticalBlowsDown) {
  auto r = check_form_nonnegativity(interval_problem(0.0, "-0.3*d^-2"), 2, 3);
  EXPECT_EQ(r.verdict, Verdict::Fail);
  ASSERT_EQ(r.level_minima.size(), 3u);
  EXPECT_LT(r.level_minima[2], 0.0);
  EXPECT_GT(std::abs(r.level_minima[2]), 10 * std::abs(r.level_minima[0]));
}

TEST(FormCheck, RestrictedIsNoLarger) {
  auto p = interval_problem(0.0, "-0.1*d^-2");
  auto loc = check_form_nonnegativity(p, 4, 1, StripBoundary::Localized);
  auto res = check_form_nonnegativity(p, 4, 1, StripBoundary::Restricted);
  EXPECT_LE(res.level_minima[0], loc.level_minima[0] + 1e-10);
  EXPECT_GT(res.level_dofs[0], loc.level_dofs[0]);
}

TEST(FormCheck, DiscStrip) {
  ProblemSpec p;
  p.domain = geometry::Domain::disc({0, 0}, 1);
  p.form.potential = CoefficientExpr::parse("-0.1*d^-2");
  p.form.beta = 0.0;
  p.h = 0.1;
  p.elements_per_strip_2d = 4;
  auto r = check_form_nonnegativity(p, 4, 1);
  EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(Diagnostic, WeightedFormIsDiscrete) {
  auto p = interval_problem(0.5, "0", 0.9);
  p.k_values.clear();
  for (int k = 2; k <= 16; ++k) p.k_values.push_back(k);
  auto r = discreteness_diagnostic(p);
  EXPECT_EQ(r.verdict, Discreteness::Discrete) << r.reason;
  ASSERT_TRUE(r.persson && r.persson->exponent);
  EXPECT_GE(*r.persson->exponent, 1.4);
  EXPECT_EQ(r.failed_stage, 0);
}

TEST(Diagnostic, LaplacianIsDiscrete) {
  auto p = interval_problem(0.0, "0");
  p.k_values = {2, 3, 4, 6, 8};
  auto r = discreteness_diagnostic(p);
  EXPECT_EQ(r.verdict, Discreteness::Discrete) << r.reason;
  EXPECT_NEAR(*r.persson->exponent, 2.0, 0.05);
  EXPECT_EQ(r.stages.size(), 2u);
}

TEST(Diagnostic, SupercriticalStopsAtStageOne) {
  auto p = interval_problem(0.0, "-0.3*d^-2");
  p.k_values = {2, 3, 4, 6, 8};
  auto r = discreteness_diagnostic(p);
  EXPECT_EQ(r.verdict, Discreteness::Inconclusive);
  EXPECT_EQ(r.failed_stage, 1);
  EXPECT_EQ(r.stages.size(), 1u);
  EXPECT_FALSE(r.persson.has_value());
}

TEST(Diagnostic, NeedsFiveStrips) {
  auto p = interval_problem(0.0, "0");
  p.k_values = {2, 4, 8, 16};
  EXPECT_THROW(discreteness_diagnostic(p), Error);
}
