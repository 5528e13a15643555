#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace kfplab {

/// Exponent tuple alpha in N^d.
using MultiIndex = std::vector<int>;

int order(const MultiIndex& alpha);

/// alpha! = prod_i alpha_i!
double factorial(const MultiIndex& alpha);

/// Every multi-index of dimension `dim` with |alpha| == n, in lexicographic
/// order (descending in the first coordinate).
std::vector<MultiIndex> multi_indices_of_order(int dim, int n);

/// Sparse real polynomial on R^d stored as exponent -> coefficient.
///
/// Zero coefficients are never stored, so the zero polynomial has no terms.
/// Its degree is reported as 0.
class Polynomial {
 public:
  using Terms = std::map<MultiIndex, double>;

  explicit Polynomial(int dim);
  Polynomial(int dim, Terms terms);

  int dimension() const noexcept { return dim_; }
  int degree() const noexcept { return degree_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  const Terms& terms() const noexcept { return terms_; }

  /// Coefficient of q^alpha (0 if absent).
  double coefficient(const MultiIndex& alpha) const;

  double operator()(std::span<const double> q) const;

  /// Exact partial derivative d^alpha P as a polynomial; falling factorials
  /// are computed as integer products.
  Polynomial derivative(const MultiIndex& alpha) const;

  /// Value of d^alpha P at q, without materializing the derivative.
  double derivative_at(const MultiIndex& alpha, std::span<const double> q) const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double s) const;

  /// P(q) expanded around `base`: returns Q with Q(x) = P(base + x).
  Polynomial shifted(std::span<const double> base) const;

  bool operator==(const Polynomial& other) const = default;

  std::string to_string() const;

  /// {"d": int, "terms": [{"alpha": [...], "c": float}, ...]}
  nlohmann::json to_json() const;
  static Polynomial from_json(const nlohmann::json& j);

  /// Convenience constructors.
  static Polynomial monomial(int dim, MultiIndex alpha, double c = 1.0);
  static Polynomial variable(int dim, int axis);
  static Polynomial constant(int dim, double c);

 private:
  void normalize();

  int dim_;
  int degree_ = 0;
  Terms terms_;
};

Polynomial operator*(double s, const Polynomial& p);

/// Free-function form of Polynomial::derivative_at. Throws InputError when
/// q has the wrong length or alpha has the wrong dimension or a negative entry.
double eval_derivative(const Polynomial& poly, const MultiIndex& alpha,
                       std::span<const double> q);

/// Reads a polynomial from JSON text. Parse errors are reported as
/// InputError carrying "line L, column C".
Polynomial parse_polynomial(const std::string& text);
Polynomial load_polynomial(const std::string& path);

}  // namespace kfplab
