#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "kfplab/errors.hpp"
#include "kfplab/ims.hpp"
#include "kfplab/subelliptic.hpp"
#include "kfplab/test_functions.hpp"
#include "kfplab/weyl.hpp"

using namespace kfplab;

namespace {

Polynomial harmonic() { return Polynomial::monomial(1, {2}, 0.5); }
Polynomial quartic() { return Polynomial::monomial(1, {4}, 0.25); }

DiscreteGrid grid1(int nq, int np, double lq, int fd = 4) {
  DiscreteGrid g;
  g.d = 1;
  g.nq = nq;
  g.np = np;
  g.lq = lq;
  g.fd_order = fd;
  return g;
}

template <class F>
double integrate(F f) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -std::numeric_limits<double>::infinity(),
                                                                     std::numeric_limits<double>::infinity(), 15, 1e-13);
}

// Rayleigh quotient of u_n by composite Simpson on a uniform grid
double simpson_weyl(int n, int m1, int m2) {
  const double nn = n;
  const double lo2 = -nn * nn - nn, hi2 = -nn * nn + nn;
  const double w = 8.0 / std::sqrt(nn * nn - nn);
  auto chi = [](double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; };
  auto dchi = [&](double s) { return std::abs(s) < 1.0 ? chi(s) * (-2.0 * s) / std::pow(1.0 - s * s, 2) : 0.0; };
  double num = 0.0, den = 0.0;
  const double h1 = 2.0 * w / m1, h2 = (hi2 - lo2) / m2;
  for (int i = 0; i <= m1; ++i) {
    const double q1 = -w + i * h1;
    const double wi = (i == 0 || i == m1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    for (int j = 0; j <= m2; ++j) {
      const double q2 = lo2 + j * h2;
      const double wj = (j == 0 || j == m2) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      const double a = q1 * q1 - q2;
      const double v = a * a - q2 * q2;
      const double s = (q2 + nn * nn) / nn;
      const double e = std::exp(-2.0 * v);
      num += wi * wj * std::pow(dchi(s) / nn, 2) * e;
      den += wi * wj * chi(s) * chi(s) * e;
    }
  }
  return num / den;
}

}  // namespace

TEST(Ims, TrivialPartitionIsExact) {
  for (int fd : {2, 4}) {
    const ImsReport r = ims_identity_check(DerivativeBank(quartic()), grid1(64, 8, 6.0, fd), trivial_cutoff(1), 5, 1);
    EXPECT_EQ(r.max_relative_defect, 0.0);
    EXPECT_EQ(r.unity_defect, 0.0);
    EXPECT_EQ(r.cutoffs, 1u);
  }
}

TEST(Ims, SecondOrderVanishing) {
  const int nq[] = {64, 128, 256};
  const ImsRefinement ref =
      ims_refinement(DerivativeBank(quartic()), grid1(64, 8, 6.0, 2), two_bump_cutoff(0.0, 1.0), nq, 4, 3);
  ASSERT_EQ(ref.ratios.size(), 2u);
  for (double r : ref.ratios) EXPECT_NEAR(r, 4.0, 0.6);
  EXPECT_NEAR(ref.order, 2.0, 0.3);
  for (const auto& run : ref.runs) EXPECT_LT(run.unity_defect, 1e-12);
}

TEST(Ims, FourthOrderStencilVanishesFaster) {
  const int nq[] = {64, 128, 256};
  const ImsRefinement ref =
      ims_refinement(DerivativeBank(quartic()), grid1(64, 8, 6.0, 4), two_bump_cutoff(0.0, 1.0), nq, 4, 3);
  EXPECT_GT(ref.order, 3.5);
}

TEST(Ims, CommutatorPartIgnoresQuadraticTerms) {
  const DiscreteGrid g = grid1(128, 8, 6.0, 2);
  const Polynomial shifted = quartic() + Polynomial::monomial(1, {2}, 3.0) + Polynomial::monomial(1, {1}, -1.0);
  const ImsReport a = ims_identity_check(DerivativeBank(quartic()), g, two_bump_cutoff(0.0, 1.0), 4, 9);
  const ImsReport b = ims_identity_check(DerivativeBank(shifted), g, two_bump_cutoff(0.0, 1.0), 4, 9);
  ASSERT_EQ(a.commutator_parts.size(), b.commutator_parts.size());
  for (std::size_t i = 0; i < a.commutator_parts.size(); ++i) {
    const double ca = a.commutator_parts[i] * a.lhs[i], cb = b.commutator_parts[i] * b.lhs[i];
    EXPECT_NEAR(ca, cb, 1e-10 * std::abs(ca));
  }
}

TEST(Ims, TwoBumpCutoffIsAPartition) {
  const CutoffFamily f = two_bump_cutoff(0.5, 1.5);
  for (double q = -4.0; q <= 4.0; q += 0.01) {
    double s = 0;
    for (const auto& c : f.evaluate(std::span<const double>(&q, 1))) s += c.psi * c.psi;
    EXPECT_NEAR(s, 1.0, 1e-14);
  }
  EXPECT_THROW(two_bump_cutoff(0.0, 0.0), InputError);
}

TEST(Subelliptic, RequiredConstantSolvesTheQuadratic) {
  const double ku2 = 3.0, u2 = 2.0, rhs = 50.0;
  const double c = required_constant(ku2, u2, rhs);
  EXPECT_NEAR(ku2 + c * u2, rhs / c, 1e-12);
  EXPECT_THROW(required_constant(1.0, 0.0, 1.0), InputError);
}

TEST(Subelliptic, GaussianGroundStateQuadratureOracle) {
  // u = g(q) psi_0(p), V = q^2/2, g = exp(-(q - c)^2 / (2 w^2))
  const double c = 0.7, w = 0.9;
  const DiscreteGrid grid = grid1(800, 4, 8.0);
  const DerivativeBank bank(harmonic());
  const double center[] = {c};
  const int herm[] = {0};
  const Eigen::VectorXd u = gaussian_hermite(grid, center, w, herm);
  const DiscreteOperator k = assemble_kfp(bank, grid);
  const SubellipticWeights weights(bank, grid);
  const auto terms = weights.evaluate(u);
  const double u2 = u.squaredNorm();

  auto g = [&](double q) { return std::exp(-(q - c) * (q - c) / (2 * w * w)); };
  const double g2 = integrate([&](double q) { return g(q) * g(q); });
  // K u = (g' + q g) psi_1 / sqrt2 + g psi_0 / 2
  const double ku2 = integrate([&](double q) {
    const double dg = -(q - c) / (w * w) * g(q);
    return 0.5 * std::pow(dg + q * g(q), 2) + 0.25 * g(q) * g(q);
  });
  const double l_op = log_weight(1.0);
  const double grad = integrate([&](double q) { return std::pow(log_weight(std::cbrt(1.0 + q * q)), 2) * g(q) * g(q); });
  const double hess = std::pow(log_weight(std::pow(2.0, 0.25)), 2) * g2;
  // |g^(xi)|^2 / (2 pi) = w^2 exp(-w^2 xi^2)
  const double dq_cont = integrate([&](double xi) {
                           return std::pow(log_weight(std::cbrt(1.0 + xi * xi)), 2) * w * w * std::exp(-w * w * xi * xi);
                         });

  EXPECT_NEAR((k.matrix * u).squaredNorm() / u2, ku2 / g2, 1e-6 * ku2 / g2);
  EXPECT_NEAR(terms.op / u2, l_op * l_op, 1e-12);
  EXPECT_NEAR(terms.gradient / u2, grad / g2, 1e-6 * grad / g2);
  EXPECT_NEAR(terms.hessian / u2, hess / g2, 1e-12 * hess / g2);
  EXPECT_NEAR(terms.dq / u2, dq_cont / g2, 1e-6 * dq_cont / g2);
}

TEST(Subelliptic, HarmonicConstantStable) {
  const DerivativeBank bank(harmonic());
  const RefinementTrace t = subelliptic_refinement(bank, {grid1(64, 8, 8.0), grid1(96, 12, 8.0)}, 6, 1);
  EXPECT_TRUE(std::isfinite(t.runs[0].c));
  EXPECT_GE(t.runs[0].c, 1.0);
  EXPECT_LE(t.growth, 0.5);
  EXPECT_FALSE(t.runs[0].worst.empty());
  const auto j = to_json(t);
  EXPECT_TRUE(j.contains("refinement_trace"));
}

TEST(Subelliptic, SeedRecordedAndDeterministic) {
  const DerivativeBank bank(quartic());
  const EstimateReport a = subelliptic_report(bank, grid1(48, 8, 5.0), 4, 77);
  const EstimateReport b = subelliptic_report(bank, grid1(48, 8, 5.0), 4, 77);
  EXPECT_EQ(a.seed, 77u);
  EXPECT_EQ(a.c, b.c);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(to_json(a)["seed"], 77);
}

TEST(TestFunctions, SeededAndShaped) {
  const DiscreteGrid g = grid1(32, 6, 4.0);
  const auto a = smooth_phase_vectors(g, 3, 5), b = smooth_phase_vectors(g, 3, 5), c = smooth_phase_vectors(g, 3, 6);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0].size(), static_cast<Eigen::Index>(g.phase_size()));
  EXPECT_EQ((a[1] - b[1]).norm(), 0.0);
  EXPECT_GT((a[1] - c[1]).norm(), 0.0);
}

TEST(Weyl, ExponentNearMinusTwo) {
  const int n[] = {4, 8, 16, 32};
  const WeylReport r = weyl_rayleigh(-1.0, n);
  ASSERT_EQ(r.points.size(), 4u);
  EXPECT_GE(r.fit.exponent, -2.3);
  EXPECT_LE(r.fit.exponent, -1.7);
  for (std::size_t i = 1; i < r.points.size(); ++i) EXPECT_LT(r.points[i].quotient, r.points[i - 1].quotient);
}

TEST(Weyl, MatchesSimpsonOracle) {
  const int n[] = {4, 9};
  const WeylReport r = weyl_rayleigh(-1.0, n);
  EXPECT_NEAR(r.points[0].quotient, simpson_weyl(4, 800, 800), 1e-6 * r.points[0].quotient);
  EXPECT_NEAR(r.points[1].quotient, simpson_weyl(9, 800, 800), 1e-6 * r.points[1].quotient);
}

TEST(Weyl, SupportsAreDisjoint) {
  EXPECT_EQ(weyl_overlap(-1.0, 8, 9), 0.0);
  EXPECT_EQ(weyl_overlap(-1.0, 8, 20), 0.0);
  EXPECT_GT(weyl_overlap(-1.0, 8, 8), 0.0);
  const auto [lo, hi] = weyl_q2_support(8);
  EXPECT_EQ(lo, -72.0);
  EXPECT_EQ(hi, -56.0);
}

TEST(Weyl, RejectsBadInput) {
  const int n[] = {4, 8};
  WeylOptions zero;
  zero.amplitude = 0.0;
  EXPECT_THROW(weyl_rayleigh(-1.0, n, zero), InputError);
  EXPECT_THROW(weyl_rayleigh(0.5, n), InputError);
  const int bad[] = {8, 4};
  EXPECT_THROW(weyl_rayleigh(-1.0, bad), InputError);
  const int small[] = {1, 4};
  EXPECT_THROW(weyl_rayleigh(-1.0, small), InputError);
}

TEST(Weyl, NonConvergenceCarriesTrace) {
  const int n[] = {16};
  WeylOptions o;
  o.initial_panels = 1;
  o.max_panels = 2;
  o.tol = 1e-15;
  try {
    weyl_rayleigh(-1.0, n, o);
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("(1, "), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("(2, "), std::string::npos) << e.what();
  }
}
