#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hardylab/errors.hpp"
#include "hardylab/hardy.hpp"
#include "hardylab/mesh.hpp"
#include "oracles.hpp"

using namespace hardylab;
using namespace hardylab::hardy;

namespace {

const Domain unit = Domain::interval(0, 1);
const Domain disc = Domain::disc({0, 0}, 1);

double bound(const Domain& d, Method m, double alpha = 0, double beta = 0, std::optional<double> delta = {}) {
  return lambda_bound(d, {m, alpha, beta, delta, 100}).lambda;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

} // namespace

TEST(Constants, Examples) {
  EXPECT_EQ(kappa(0.0), 0.25);
  EXPECT_NEAR(fmt_constant(-1.0, 0.0), 0.5, 1e-15);
  EXPECT_NEAR(fmt_constant(0.0, 0.0), 3.0, 1e-15);
  EXPECT_NEAR(tubular_constant(0.0, 0.0), 6.0, 1e-15);
  auto c = hardy_constants(0.0, 0.0);
  EXPECT_EQ(c.kappa, 0.25);
  EXPECT_NEAR(*c.c_fmt, 3.0, 1e-15);
  EXPECT_NEAR(*c.c_tub, 6.0, 1e-15);
  EXPECT_NEAR(kappa(0.5), 0.0625, 1e-16);
}

TEST(Constants, BranchContinuityAtMinusOne) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 0.999);
  for (int i = 0; i < 100; ++i) {
    double beta = u(rng);
    double scale = std::exp2(-1.0 - beta);
    double left = scale * (1.0 - beta) * (1.0 - beta);            // (alpha + 2 - beta)^2 at alpha = -1
    double right = scale * (1.0 - beta) * (2.0 * -1.0 + 3.0 - beta);
    EXPECT_NEAR(left, right, 1e-12 * std::max(1.0, left));
    EXPECT_NEAR(fmt_constant(-1.0, beta), right, 1e-12 * std::max(1.0, right));
    EXPECT_NEAR(fmt_constant(-1.0 - 1e-13, beta), left, 1e-9 * std::max(1.0, left));
  }
}

TEST(Constants, KappaPositiveDecreasing) {
  double prev = kappa(-10.0);
  for (double beta = -9.9; beta < 1.0; beta += 0.1) {
    double k = kappa(beta);
    EXPECT_GT(k, 0.0);
    EXPECT_LT(k, prev);
    prev = k;
  }
  EXPECT_EQ(code_of([] { (void)kappa(1.0); }), ErrorCode::ExponentOutOfRange);
}

TEST(Constants, TubularPositivity) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ub(-3.0, 0.99), ua(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    double beta = ub(rng), alpha = ua(rng);
    if (2 * alpha - beta + 3 > 0) {
      EXPECT_GT(tubular_constant(alpha, beta), 0.0);
    } else {
      EXPECT_EQ(code_of([&] { (void)tubular_constant(alpha, beta); }), ErrorCode::ExponentOutOfRange);
    }
  }
  EXPECT_FALSE(hardy_constants(-2.5, 0.0).c_fmt.has_value());
}

TEST(Catalogue, UnitInterval) {
  EXPECT_NEAR(bound(unit, Method::BrezisMarcus), 0.25, 1e-12);
  EXPECT_NEAR(bound(unit, Method::FmtDint), 3.0, 1e-12);
  EXPECT_NEAR(bound(unit, Method::AvkhadievWirths), 3.76, 1e-12);
  EXPECT_NEAR(bound(unit, Method::FmtWeighted, 0, 0), bound(unit, Method::FmtDint), 1e-12);
  EXPECT_EQ(bound(unit, Method::None), 0.0);
}

TEST(Catalogue, UnitDisc) {
  EXPECT_NEAR(volume_constant(2), 2 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(bound(disc, Method::HhlVolume), 0.5, 1e-12);
  EXPECT_NEAR(bound(disc, Method::EvansLewisVolume), 3.0, 1e-12);
  EXPECT_NEAR(bound(disc, Method::FmtDint), 0.75, 1e-12);
  EXPECT_NEAR(bound(disc, Method::BrezisMarcus), 1.0 / 16, 1e-12);
}

TEST(Catalogue, VolumeConstantInOneDimension) {
  // |S^0| = 2 points, so K(1) = 1 * 2^2 = 4
  EXPECT_NEAR(volume_constant(1), 4.0, 1e-12);
  EXPECT_NEAR(bound(unit, Method::HhlVolume), 1.0, 1e-12);
}

TEST(Catalogue, HypothesesChecked) {
  Domain annulus = Domain::annulus({0, 0}, 0.5, 1);
  EXPECT_EQ(code_of([&] { (void)bound(annulus, Method::FmtDint); }), ErrorCode::MethodNotApplicable);
  EXPECT_EQ(code_of([&] { (void)bound(Domain::torus(3, 1), Method::HhlVolume); }), ErrorCode::MethodNotApplicable);
  EXPECT_EQ(code_of([&] { (void)bound(Domain::torus(1.8, 1), Method::FmtWeighted); }),
            ErrorCode::MethodNotApplicable);
  EXPECT_EQ(code_of([&] { (void)bound(Domain::torus(1.8, 1), Method::Tubular, 0, 0, 0.2); }),
            ErrorCode::MethodNotApplicable);
  EXPECT_EQ(code_of([&] { (void)bound(unit, Method::Tubular, 0, 0, 0.7); }), ErrorCode::MethodNotApplicable);
  EXPECT_EQ(code_of([&] { (void)bound(unit, Method::Tubular); }), ErrorCode::InvalidArgument);
  auto spec = lambda_bound(Domain::torus(3, 1), {Method::Tubular, 0.0, 0.0, 0.2, 100});
  EXPECT_NEAR(spec.lambda, 6.0 * 0.2, 1e-12);
  EXPECT_FALSE(spec.notes.empty());
  EXPECT_NEAR(bound(Domain::torus(3, 1), Method::FmtWeighted), 3.0 / 4.0, 1e-12);
}

TEST(Catalogue, MethodNames) {
  for (Method m : {Method::None, Method::BrezisMarcus, Method::FmtDint, Method::AvkhadievWirths, Method::HhlVolume,
                   Method::EvansLewisVolume, Method::FmtWeighted, Method::Tubular})
    EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW(parse_method("sharpest"), Error);
}

TEST(Certificate, ClassicalHardy) {
  auto cert = verify_hardy(unit, 0.0, 0.0, 0.0);
  ASSERT_EQ(cert.levels.size(), 3u);
  for (std::size_t i = 0; i < cert.levels.size(); ++i) {
    EXPECT_GE(cert.levels[i].minimum, 0.25 - kCertTolerance);
    if (i > 0) EXPECT_LT(cert.levels[i].minimum, cert.levels[i - 1].minimum);
  }
  EXPECT_LT(cert.levels.back().minimum, 0.26);
  EXPECT_EQ(cert.verdict, CertVerdict::Certified);
  EXPECT_NE(cert.semantics.find("upper bound"), std::string::npos);
}

TEST(Certificate, InteriorDiameterBound) {
  auto cert = verify_hardy(unit, 0.0, 0.0, 3.0);
  for (const auto& l : cert.levels) EXPECT_GE(l.margin, -kCertTolerance);
  EXPECT_EQ(cert.verdict, CertVerdict::Certified);
}

TEST(Certificate, IndependentTridiagonalOracle) {
  // same graded mesh, own assembly and Sturm bisection
  const int n = 3000;
  const double g = mesh::default_grading_1d(n);
  auto nodes = oracle::graded_nodes(n, g);
  auto d = [](double x) { return std::min(x, 1 - x); };
  auto t = oracle::p1_pencil(nodes, [](double) { return 1.0; }, [&](double) { return -3.0; },
                             [&](double x) { return std::pow(d(x), -2.0); }, true);
  double reference = oracle::sturm_eigenvalue(t, 0, 0.0, 1.0);
  EXPECT_GE(reference - 0.25, 0.0);

  Ladder ladder;
  ladder.n_1d = {n};
  ladder.grading_1d = g;
  auto cert = verify_hardy(unit, 0.0, 0.0, 3.0, ladder);
  EXPECT_NEAR(cert.levels[0].minimum, reference, 1e-6 * reference);
  EXPECT_GE(cert.margin, 0.0);
}

TEST(Certificate, WeightedHardy) {
  auto cert = verify_hardy(unit, 0.5, 0.0, 0.0);
  for (const auto& l : cert.levels) EXPECT_GE(l.minimum, kappa(0.5) - kCertTolerance);
  EXPECT_EQ(cert.verdict, CertVerdict::Certified);
}

TEST(Certificate, MonotoneInLambda) {
  Ladder ladder;
  ladder.n_1d = {512};
  double prev = 1e300;
  for (double lambda : {0.0, 1.0, 3.0}) {
    double m = verify_hardy(unit, 0.0, 0.0, lambda, ladder).levels[0].minimum;
    EXPECT_LT(m, prev);
    prev = m;
  }
}

TEST(Certificate, TooLargeLambdaIsInconclusive) {
  auto cert = verify_hardy(unit, 0.0, 0.0, 20.0);
  EXPECT_LT(cert.margin, 0.0);
  EXPECT_EQ(cert.verdict, CertVerdict::Inconclusive);
}

TEST(Certificate, DiscLadder) {
  Ladder ladder;
  ladder.h = 0.2;
  ladder.levels_2d = 2;
  ladder.solver.tol = 1e-8;
  auto cert = verify_hardy(disc, 0.0, 0.0, 0.0, ladder);
  ASSERT_EQ(cert.levels.size(), 2u);
  EXPECT_GT(cert.levels[1].dofs, cert.levels[0].dofs);
  for (const auto& l : cert.levels) EXPECT_GE(l.minimum, 0.25 - kCertTolerance);
}

TEST(Certificate, TorusLadderUsesCrossSection) {
  Ladder ladder;
  ladder.h = 0.25;
  ladder.levels_2d = 2;
  auto meshes = ladder_meshes(Domain::torus(3, 1), ladder);
  ASSERT_EQ(meshes.size(), 2u);
  EXPECT_EQ(std::get<mesh::TriMesh>(meshes[0]).coords, mesh::CoordinateSystem::Axisymmetric);
}
