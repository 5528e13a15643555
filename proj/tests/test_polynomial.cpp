#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kfplab/errors.hpp"
#include "kfplab/polynomial.hpp"

using namespace kfplab;

namespace {

Polynomial saddle() { return Polynomial::monomial(2, {2, 2}, -1.0); }

Polynomial random_poly(std::mt19937_64& rng, int dim, int degree) {
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  Polynomial::Terms terms;
  for (int t = 0; t < 6; ++t) {
    MultiIndex a(dim, 0);
    int left = degree;
    for (int i = 0; i < dim; ++i) {
      a[i] = std::uniform_int_distribution<int>(0, left)(rng);
      left -= a[i];
    }
    terms[a] += c(rng);
  }
  return Polynomial(dim, terms);
}

}  // namespace

TEST(Polynomial, DropsZeroCoefficientsAndCachesDegree) {
  Polynomial p(2, {{{1, 0}, 0.0}, {{2, 3}, 4.0}, {{0, 1}, -1.0}});
  EXPECT_EQ(p.terms().size(), 2u);
  EXPECT_EQ(p.degree(), 5);
  EXPECT_TRUE(Polynomial(3).is_zero());
  EXPECT_THROW(Polynomial(0), InputError);
}

TEST(Polynomial, CancellingSumIsZero) {
  const Polynomial p = saddle();
  EXPECT_TRUE((p - p).is_zero());
  EXPECT_EQ((p - p).degree(), 0);
}

TEST(EvalDerivative, HandValues) {
  const Polynomial v = saddle();
  const double q[] = {1.0, 1.0};
  EXPECT_DOUBLE_EQ(eval_derivative(v, {1, 0}, q), -2.0);
  const double r[] = {-3.7, 0.25};
  EXPECT_DOUBLE_EQ(eval_derivative(v, {2, 2}, r), -4.0);
  EXPECT_EQ(eval_derivative(v, {3, 2}, r), 0.0);
  EXPECT_EQ(eval_derivative(v, {0, 7}, r), 0.0);
}

TEST(EvalDerivative, RejectsBadShapes) {
  const Polynomial v = saddle();
  const double q3[] = {1.0, 2.0, 3.0};
  EXPECT_THROW(eval_derivative(v, {1, 0}, q3), InputError);
  const double q2[] = {1.0, 2.0};
  EXPECT_THROW(eval_derivative(v, {1}, q2), InputError);
  EXPECT_THROW(eval_derivative(v, {-1, 0}, q2), InputError);
}

TEST(EvalDerivative, IntegerExactness) {
  // 7 q^9: ninth derivative is 7 * 9! exactly
  const Polynomial p = Polynomial::monomial(1, {9}, 7.0);
  const double q[] = {3.0};
  EXPECT_EQ(eval_derivative(p, {9}, q), 7.0 * 362880.0);
  EXPECT_EQ(eval_derivative(p, {1}, q), 63.0 * std::pow(3.0, 8));
}

TEST(EvalDerivative, MatchesCentralDifference) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double h = 1e-5;
  for (int trial = 0; trial < 40; ++trial) {
    const int dim = 1 + trial % 3;
    const int degree = 2 + trial % 5;
    const Polynomial p = random_poly(rng, dim, degree);
    std::vector<double> q(dim);
    for (auto& x : q) x = u(rng);
    for (const auto& alpha : multi_indices_of_order(dim, 2)) {
      for (int axis = 0; axis < dim; ++axis) {
        if (alpha[axis] == 0) continue;
        MultiIndex lower = alpha;
        --lower[axis];
        auto qp = q, qm = q;
        qp[axis] += h;
        qm[axis] -= h;
        const double fd = (eval_derivative(p, lower, qp) - eval_derivative(p, lower, qm)) / (2 * h);
        const double exact = eval_derivative(p, alpha, q);
        EXPECT_NEAR(fd, exact, 1e-4 * std::max(1.0, std::abs(exact)));
      }
    }
  }
}

TEST(Polynomial, DerivativePolynomialAgreesWithPointwise) {
  std::mt19937_64 rng(11);
  const Polynomial p = random_poly(rng, 3, 6);
  const double q[] = {0.3, -1.2, 0.8};
  for (const auto& a : multi_indices_of_order(3, 3)) {
    EXPECT_NEAR(p.derivative(a)(q), p.derivative_at(a, q), 1e-10);
  }
}

TEST(Polynomial, ShiftedReexpands) {
  std::mt19937_64 rng(3);
  const Polynomial p = random_poly(rng, 2, 5);
  const double base[] = {0.7, -0.4};
  const Polynomial s = p.shifted(base);
  const double x[] = {0.2, 0.5};
  const double bx[] = {0.9, 0.1};
  EXPECT_NEAR(s(x), p(bx), 1e-12);
}

TEST(Polynomial, ArithmeticAgreesPointwise) {
  const Polynomial a = Polynomial::variable(2, 0) * 2.0 + Polynomial::constant(2, 1.0);
  const Polynomial b = saddle();
  const double q[] = {1.5, -2.0};
  EXPECT_DOUBLE_EQ((a * b)(q), a(q) * b(q));
  EXPECT_DOUBLE_EQ((a + b)(q), a(q) + b(q));
  EXPECT_DOUBLE_EQ((3.0 * b)(q), 3.0 * b(q));
}

TEST(PolynomialJson, RoundTrip) {
  const Polynomial p(2, {{{4, 0}, 1.0}, {{2, 1}, -2.0}, {{0, 2}, 1.5}});
  const Polynomial back = Polynomial::from_json(p.to_json());
  EXPECT_EQ(back, p);
  EXPECT_EQ(parse_polynomial(p.to_json().dump()), p);
}

TEST(PolynomialJson, ParsesDocumentedFormat) {
  const Polynomial p = parse_polynomial(R"({"d": 2, "terms": [{"alpha": [2, 2], "c": -1}]})");
  EXPECT_EQ(p, saddle());
  const Polynomial empty = parse_polynomial(R"({"d": 2, "terms": []})");
  EXPECT_TRUE(empty.is_zero());
}

TEST(PolynomialJson, MalformedReportsLineAndColumn) {
  try {
    parse_polynomial("{\"d\": 2,\n \"terms\": [ {\"alpha\": [1,0] \"c\": 1} ]}");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column"), std::string::npos) << msg;
  }
}

TEST(PolynomialJson, RejectsSchemaViolations) {
  EXPECT_THROW(parse_polynomial(R"({"terms": []})"), InputError);
  EXPECT_THROW(parse_polynomial(R"({"d": 2, "terms": [{"alpha": [1], "c": 1}]})"), InputError);
  EXPECT_THROW(parse_polynomial(R"({"d": 2, "terms": [{"alpha": [1.5, 0], "c": 1}]})"), InputError);
  EXPECT_THROW(parse_polynomial(R"({"d": 0, "terms": []})"), InputError);
  EXPECT_THROW(load_polynomial("/nonexistent/potential.json"), InputError);
}

TEST(MultiIndices, CountAndFactorial) {
  EXPECT_EQ(multi_indices_of_order(2, 4).size(), 5u);
  EXPECT_EQ(multi_indices_of_order(3, 3).size(), 10u);
  EXPECT_DOUBLE_EQ(factorial({2, 3}), 12.0);
  EXPECT_EQ(order({2, 3, 1}), 6);
}
