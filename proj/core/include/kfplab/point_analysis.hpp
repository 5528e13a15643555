#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kfplab/polynomial.hpp"

namespace kfplab {

/// How multi-indices are counted in the derivative indicators R^{>=n}, R^{=n}.
///
/// Distinct sums |d^alpha V|^{1/|alpha|} once per multi-index alpha (the
/// toolkit default). OrderedTuple weights each alpha by the number of ordered
/// derivative sequences producing it, |alpha|! / alpha!.
enum class IndexConvention { Distinct, OrderedTuple };

/// All derivative polynomials d^alpha V, 1 <= |alpha| <= deg V, precompiled
/// for fast pointwise evaluation. Immutable; safe to share across threads.
class DerivativeBank {
 public:
  explicit DerivativeBank(Polynomial potential);

  const Polynomial& potential() const noexcept { return potential_; }
  int dimension() const noexcept { return potential_.dimension(); }
  int degree() const noexcept { return potential_.degree(); }

  double value(std::span<const double> q) const;
  Eigen::VectorXd gradient(std::span<const double> q) const;
  Eigen::MatrixXd hessian(std::span<const double> q) const;

  /// d^alpha V(q) for a cached alpha with 1 <= |alpha| <= degree.
  double derivative(const MultiIndex& alpha, std::span<const double> q) const;

  /// R^{>=n}(q) = sum over n <= |alpha| <= r of |d^alpha V(q)|^{1/|alpha|}.
  /// Returns 0 when n > r.
  double r_geq(int n, std::span<const double> q,
               IndexConvention conv = IndexConvention::Distinct) const;

  /// R^{=n}(q) = sum over |alpha| = n of |d^alpha V(q)|^{1/n}.
  double r_eq(int n, std::span<const double> q,
              IndexConvention conv = IndexConvention::Distinct) const;

  /// R^{=n}(q) for every n in 1..r in one pass (index n-1).
  std::vector<double> r_eq_all(std::span<const double> q,
                               IndexConvention conv = IndexConvention::Distinct) const;

 private:
  struct Compiled {
    std::vector<double> coef;
    std::vector<int> exps;  // term-major, dim entries per term
  };
  struct Entry {
    MultiIndex alpha;
    int order;
    double multiplicity;  // |alpha|!/alpha!
    Compiled poly;
  };

  double eval(const Compiled& c, const std::vector<double>& powers) const;
  std::vector<double> power_table(std::span<const double> q) const;
  void check_point(std::span<const double> q) const;

  Polynomial potential_;
  Compiled value_;
  std::vector<Entry> entries_;           // ordered by |alpha|, then alpha
  std::vector<std::size_t> order_start_;  // entries_ offset for order n (size r+2)
};

struct TraceSplit {
  double tr_plus = 0.0;
  double tr_minus = 0.0;
};

/// Sum of positive eigenvalues and minus the sum of nonpositive eigenvalues
/// of a symmetric matrix. Eigenvalues with |nu| < 1e-12 * |H|_F count as 0.
/// Throws InputError when H is not symmetric to 1e-12 relative.
TraceSplit hessian_trace_split(const Eigen::MatrixXd& h);

/// Same split from precomputed eigenvalues.
TraceSplit trace_split_from_eigenvalues(const Eigen::VectorXd& eigenvalues, double frobenius);

/// L(s) = (s+1)/log(s+1), s >= 1.
double log_weight(double s);

/// <x> = sqrt(1 + x^2)
inline double japanese_bracket(double x) { return std::sqrt(1.0 + x * x); }

/// Both sides of the Sigma(kappa) membership test,
///   |grad V|^{4/3} >= kappa (|Hess V|_F + R^{>=3}^4 + 1).
struct SigmaSides {
  double lhs = 0.0;
  double rhs = 0.0;
  bool member() const noexcept { return lhs >= rhs; }
};
SigmaSides sigma_sides(double kappa, double gradient_norm, double hessian_frobenius, double r3);

struct KappaMembership {
  double kappa = 0.0;
  bool member = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct PointAnalysis {
  std::vector<double> point;
  Eigen::VectorXd gradient;
  double gradient_norm = 0.0;
  Eigen::MatrixXd hessian;
  double hessian_frobenius = 0.0;
  Eigen::VectorXd eigenvalues;  // ascending
  double tr_plus = 0.0;
  double tr_minus = 0.0;
  std::map<int, double> r_geq;  // n = 1..r
  std::map<int, double> r_eq;
  std::vector<KappaMembership> sigma;
  /// Filled only when requested: the indicators under the ordered-tuple count.
  std::map<int, double> r_geq_ordered;
  std::map<int, double> r_eq_ordered;
};

PointAnalysis analyze_point(const DerivativeBank& bank, std::span<const double> q,
                            std::span<const double> kappas = {},
                            bool both_conventions = false);

PointAnalysis analyze_point(const Polynomial& poly, std::span<const double> q,
                            std::span<const double> kappas = {},
                            bool both_conventions = false);

nlohmann::json to_json(const PointAnalysis& a);

}  // namespace kfplab
