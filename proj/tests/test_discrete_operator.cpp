#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <gtest/gtest.h>

#include "kfplab/discrete_operator.hpp"
#include "kfplab/errors.hpp"
#include "kfplab/lanczos.hpp"

using namespace kfplab;

namespace {

Polynomial harmonic() { return Polynomial::monomial(1, {2}, 0.5); }
Polynomial saddle() { return Polynomial::monomial(2, {2, 2}, -1.0); }

DiscreteGrid grid1(int nq, int np, double lq = 8.0) {
  DiscreteGrid g;
  g.d = 1;
  g.nq = nq;
  g.np = np;
  g.lq = lq;
  return g;
}

Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = normal(rng);
  return u;
}

class BudgetEnv {
 public:
  explicit BudgetEnv(const char* value) { setenv(kBudgetVariable, value, 1); }
  ~BudgetEnv() { unsetenv(kBudgetVariable); }
};

}  // namespace

TEST(Hermite, LadderBlocks) {
  const int np = 6;
  const Eigen::MatrixXd p(hermite_position(np));
  const Eigen::MatrixXd dp(hermite_derivative(np));
  const Eigen::MatrixXd op(hermite_oscillator(np));
  EXPECT_LT((p - p.transpose()).norm(), 1e-15);
  EXPECT_LT((dp + dp.transpose()).norm(), 1e-15);
  for (int n = 0; n < np; ++n) EXPECT_DOUBLE_EQ(op(n, n), n + 0.5);
  // D_p p - p D_p = 1 away from the truncation corner
  const Eigen::MatrixXd comm = dp * p - p * dp;
  EXPECT_LT((comm.topLeftCorner(np - 1, np - 1) - Eigen::MatrixXd::Identity(np - 1, np - 1)).norm(), 1e-14);
  // O_p = (p^2 - D_p^2) / 2 on the same block
  const Eigen::MatrixXd o = 0.5 * (p * p - dp * dp);
  EXPECT_LT((o - op).topLeftCorner(np - 1, np - 1).norm(), 1e-14);
}

TEST(FiniteDifferences, StencilOrders) {
  const int n = 200;
  const double lq = 6.0, h = 2.0 * lq / (n + 1);
  Eigen::VectorXd f(n), df(n), d2f(n);
  for (int i = 0; i < n; ++i) {
    const double q = -lq + (i + 1) * h;
    f[i] = std::exp(-q * q);
    df[i] = -2.0 * q * f[i];
    d2f[i] = (4.0 * q * q - 2.0) * f[i];
  }
  const Eigen::VectorXd e2 = SparseMatrix(first_derivative(n, h, 2)) * f - df;
  const Eigen::VectorXd e4 = SparseMatrix(first_derivative(n, h, 4)) * f - df;
  EXPECT_LT(e2.lpNorm<Eigen::Infinity>(), 5.0 * h * h);
  EXPECT_LT(e4.lpNorm<Eigen::Infinity>(), 20.0 * std::pow(h, 4));
  const Eigen::VectorXd l4 = SparseMatrix(laplacian(n, h, 4)) * f - d2f;
  EXPECT_LT(l4.lpNorm<Eigen::Infinity>(), 50.0 * std::pow(h, 4));
  EXPECT_THROW(first_derivative(n, h, 3), InputError);
}

TEST(AssembleKfp, SmallGridShapeAndOscillatorBlock) {
  const DiscreteOperator k = assemble_kfp(DerivativeBank(Polynomial::monomial(1, {3}, 2.0)), grid1(8, 4));
  EXPECT_EQ(k.size(), 32u);
  EXPECT_EQ(k.kind, OperatorKind::KFP);
  EXPECT_FALSE(k.symmetric);
  const DiscreteOperator op = assemble_op(grid1(8, 4));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(op.matrix));
  for (int n = 0; n < 4; ++n) EXPECT_NEAR(es.eigenvalues()[n], n + 0.5, 1e-14);
  // the symmetric part of K is exactly O_p
  const Eigen::MatrixXd kd(k.matrix);
  const Eigen::MatrixXd sym = 0.5 * (kd + kd.transpose());
  const Eigen::MatrixXd blocks = Eigen::kroneckerProduct(Eigen::MatrixXd::Identity(8, 8), Eigen::MatrixXd(hermite_oscillator(4)));
  EXPECT_LT((sym - blocks).norm(), 1e-12);
}

TEST(AssembleKfp, AccretivityFreeTransport) {
  const DiscreteOperator k = assemble_kfp(DerivativeBank(Polynomial(1)), grid1(32, 8));
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd u = random_vector(static_cast<Eigen::Index>(k.size()), t);
    EXPECT_LE(std::abs(accretivity_defect(k, u)), 1e-10 * u.squaredNorm());
  }
}

TEST(AssembleKfp, AccretivityWithPotential) {
  for (int d : {1, 2}) {
    DiscreteGrid g;
    g.d = d;
    g.nq = d == 1 ? 48 : 16;
    g.np = 6;
    g.lq = 4.0;
    const Polynomial v = d == 1 ? Polynomial::monomial(1, {4}, 0.25) - Polynomial::monomial(1, {2}) : saddle();
    const DiscreteOperator k = assemble_kfp(DerivativeBank(v), g);
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd u = random_vector(static_cast<Eigen::Index>(k.size()), 100 + t);
      const double re = u.dot(k.matrix * u);
      EXPECT_LE(std::abs(accretivity_defect(k, u)), 1e-8 * std::abs(re));
      EXPECT_GE(re, 0.5 * d * u.squaredNorm() * (1.0 - 1e-12));
    }
  }
}

TEST(AssembleKfp, HarmonicLowestRealPartConverges) {
  // continuum: lowest eigenvalue of K with O_p = n + 1/2 is 1/2
  std::vector<double> lowest;
  for (int n : {8, 12, 16, 24}) {
    const DiscreteOperator k = assemble_kfp(DerivativeBank(harmonic()), grid1(n, n, 6.0));
    const auto ev = dense_eigenvalues(k);
    lowest.push_back(ev.front().real());
  }
  const double last_change = std::abs(lowest[3] - lowest[2]);
  const double first_change = std::abs(lowest[1] - lowest[0]);
  EXPECT_LT(last_change, first_change);
  EXPECT_NEAR(lowest.back(), 0.5, 0.05);
}

TEST(AssembleKfp, SmallestSingularValueMatchesDenseSvd) {
  const DiscreteOperator k = assemble_kfp(DerivativeBank(harmonic()), grid1(24, 8));
  const SpectrumResult res = low_spectrum(k, 3);
  EXPECT_EQ(res.mode, SpectrumMode::SingularValues);
  ASSERT_TRUE(res.converged);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(k.matrix));
  const auto s = svd.singularValues();
  const Eigen::Index n = s.size();
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(res.values[i], s[n - 1 - i], 1e-8 * s[0]);
  EXPECT_GT(res.values[0], 0.0);
  const double s_fine = low_spectrum(assemble_kfp(DerivativeBank(harmonic()), grid1(48, 12)), 1).values[0];
  EXPECT_NEAR(s_fine / res.values[0], 1.0, 0.2);
}

TEST(AssembleKfp, Budget) {
  {
    BudgetEnv env("100");
    EXPECT_EQ(matrix_budget(), 100u);
    try {
      assemble_kfp(DerivativeBank(harmonic()), grid1(32, 8));
      FAIL();
    } catch (const BudgetError& e) {
      EXPECT_EQ(e.limit(), 100u);
      EXPECT_EQ(e.requested(), 256u);
      EXPECT_NE(std::string(e.what()).find(kBudgetVariable), std::string::npos);
    }
  }
  {
    BudgetEnv env("lots");
    EXPECT_THROW(matrix_budget(), InputError);
  }
  EXPECT_EQ(matrix_budget(), kDefaultBudget);
}

TEST(AssembleKfp, GridPreconditions) {
  const DerivativeBank bank(harmonic());
  EXPECT_THROW(assemble_kfp(bank, grid1(4, 8)), InputError);
  EXPECT_THROW(assemble_kfp(bank, grid1(16, 2)), InputError);
  DiscreteGrid g3 = grid1(8, 4);
  g3.d = 3;
  EXPECT_THROW(assemble_kfp(DerivativeBank(Polynomial::monomial(3, {1, 1, 1})), g3), InputError);
}

TEST(AssembleWitten, HarmonicOscillatorLevels) {
  const DiscreteOperator w = assemble_witten(DerivativeBank(harmonic()), grid1(256, 4, 10.0));
  EXPECT_TRUE(w.symmetric);
  const SpectrumResult res = low_spectrum(w, 3);
  ASSERT_TRUE(res.converged);
  EXPECT_NEAR(res.values[0], 0.0, 1e-3);
  EXPECT_NEAR(res.values[1], 2.0, 1e-3);
  EXPECT_NEAR(res.values[2], 4.0, 1e-3);
  for (double r : res.residuals) EXPECT_LE(r, 1e-8);
}

TEST(AssembleWitten, LinearPotentialShiftsByOne) {
  const DiscreteOperator w = assemble_witten(DerivativeBank(Polynomial::monomial(1, {1})), grid1(128, 4, 10.0));
  const SpectrumResult res = low_spectrum(w, 1);
  // -d^2/dq^2 + 1 with Dirichlet walls at +-10
  const double expect = 1.0 + std::pow(std::numbers::pi / 20.0, 2);
  EXPECT_NEAR(res.values[0], expect, 1e-4);
  EXPECT_GE(res.values[0], 1.0);
}

TEST(AssembleWitten, SaddleLowestEigenvaluePositive) {
  DiscreteGrid g;
  g.d = 2;
  g.np = 4;
  g.nq = 48;
  g.lq = 4.0;
  const SpectrumResult small = low_spectrum(assemble_witten(DerivativeBank(saddle()), g), 1);
  g.lq = 6.0;
  g.nq = 72;
  const SpectrumResult large = low_spectrum(assemble_witten(DerivativeBank(saddle()), g), 1);
  EXPECT_TRUE(small.converged);
  EXPECT_TRUE(large.converged);
  EXPECT_GT(small.values[0], 0.0);
  EXPECT_TRUE(std::isfinite(large.values[0]));
  RecordProperty("lowest_lq4", std::to_string(small.values[0]));
  RecordProperty("lowest_lq6", std::to_string(large.values[0]));
}

TEST(LowSpectrum, OscillatorAlone) {
  const DiscreteOperator op = assemble_op(grid1(8, 16));
  EXPECT_EQ(op.size(), 16u);
  const SpectrumResult res = low_spectrum(op, 3);
  for (int n = 0; n < 3; ++n) EXPECT_NEAR(res.values[n], n + 0.5, 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(hermite_oscillator(16)));
  for (int n = 0; n < 16; ++n) EXPECT_DOUBLE_EQ(es.eigenvalues()[n], n + 0.5);
}

TEST(LowSpectrum, DirichletLaplacianClosedForm) {
  const int n = 300;
  const double h = 1.0 / (n + 1);
  DiscreteOperator op;
  op.matrix = -laplacian(n, h, 2);
  op.symmetric = true;
  op.kind = OperatorKind::Multiplier;
  SpectrumOptions o;
  o.shift_invert = false;
  const SpectrumResult res = low_spectrum(op, 4, o);
  for (int k = 1; k <= 4; ++k) {
    const double exact = 4.0 / (h * h) * std::pow(std::sin(k * std::numbers::pi * h / 2.0), 2);
    EXPECT_NEAR(res.values[k - 1], exact, 1e-6 * exact);
  }
  EXPECT_THROW(low_spectrum(op, 21), InputError);
}

TEST(LowSpectrum, IterationCapReported) {
  const int n = 400;
  DiscreteOperator op;
  op.matrix = -laplacian(n, 1.0 / (n + 1), 2);
  op.symmetric = true;
  SpectrumOptions o;
  o.shift_invert = false;
  o.max_matvecs = 50;
  const SpectrumResult res = low_spectrum(op, 5, o);
  EXPECT_FALSE(res.converged);
  EXPECT_LE(res.matvecs, 60);
}

TEST(MatrixMarket, RoundTrip) {
  const DiscreteOperator k = assemble_kfp(DerivativeBank(harmonic()), grid1(8, 4));
  const std::string text = matrix_market_string(k.matrix);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "%%MatrixMarket matrix coordinate real general");
  long rows = 0, cols = 0, nnz = 0;
  in >> rows >> cols >> nnz;
  EXPECT_EQ(rows, 32);
  EXPECT_EQ(nnz, k.matrix.nonZeros());
  Eigen::MatrixXd back = Eigen::MatrixXd::Zero(rows, cols);
  for (long e = 0; e < nnz; ++e) {
    long i = 0, j = 0;
    double v = 0;
    in >> i >> j >> v;
    ASSERT_GE(i, 1);
    ASSERT_GE(j, 1);
    back(i - 1, j - 1) = v;
  }
  EXPECT_EQ((back - Eigen::MatrixXd(k.matrix)).norm(), 0.0);
}
