#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "kfplab/point_analysis.hpp"

namespace kfplab {

/// Degree <= 2 Taylor polynomial of V at a base point with the constants of
/// the quadratic-case estimates.
struct QuadraticModel {
  std::vector<double> center;  // q_j (equals base unless set by localize_ball)
  std::vector<double> base;    // q'_j
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  Polynomial polynomial{1};
  double tr_plus = 0.0;
  double tr_minus = 0.0;
  double min_gradient = 0.0;  // min over q of |grad V_j^2(q)|
  double a_const = 0.0;       // max{(1+Tr+)^{2/3}, 1+Tr-}
  double b_const = 0.0;       // max{min|grad V_j^2|^{4/3}, (1+Tr-)/log(2+Tr-)^2}
  double t_j = 0.0;           // 2 (1 + |H|_F^2)^{1/8}
  bool in_j_kappa = false;
  double kappa = 0.0;

  Eigen::VectorXd model_gradient(std::span<const double> q) const;
};

QuadraticModel taylor_quadratic(const DerivativeBank& bank, std::span<const double> base);
QuadraticModel taylor_quadratic(const Polynomial& poly, std::span<const double> base);

/// Builds the model for the ball B(center, radius). The ball is sampled on a
/// lattice with `per_axis` points per axis (lexicographic, points outside the
/// ball skipped). If every sample lies in Sigma(kappa) the ball counts as
/// J(kappa) and q'_j = center; otherwise q'_j is the first complement sample.
QuadraticModel localize_ball(const DerivativeBank& bank, std::span<const double> center,
                             double radius, double kappa, int per_axis = 9);

/// c_{alpha,d,r} = sum over distinct beta with 3 <= |beta| <= r of beta! a^{|alpha| - |beta|}.
double remainder_constant(int alpha_order, int dim, int degree, double a);

struct RemainderEntry {
  MultiIndex alpha;
  double constant = 0.0;
  double max_ratio = 0.0;  // max |d^a V - d^a V_j^2| / (c R^{>=3}(q'_j)^{|a|})
};

struct RemainderReport {
  double a = 0.0;
  double radius = 0.0;
  std::size_t samples = 0;
  std::vector<RemainderEntry> entries;
  double max_ratio = 0.0;
  bool pass = true;
};

/// Samples the ball B(q'_j, a / R^{>=3}(q_j)) uniformly and checks the
/// Taylor remainder bound for every |alpha| in {1, 2}.
RemainderReport remainder_check(const DerivativeBank& bank, const QuadraticModel& model, double a,
                                int samples, std::uint64_t seed);

struct ComparisonReport {
  double radius = 0.0;
  std::size_t samples = 0;
  double gradient_ratio_min = 0.0;  // |grad V| / |grad V_j^2|
  double gradient_ratio_max = 0.0;
  double hessian_ratio_min = 0.0;   // |Hess V|_F / |Hess V_j^2|_F
  double hessian_ratio_max = 0.0;
  bool gradient_pass = false;       // ratios within [1/2, 2]
  bool hessian_pass = false;
};

/// Gradient and Hessian comparisons between V and V_j^2 on B(q'_j, radius).
ComparisonReport comparison_check(const DerivativeBank& bank, const QuadraticModel& model,
                                  double radius, int samples, std::uint64_t seed);

nlohmann::json to_json(const QuadraticModel& m);
nlohmann::json to_json(const RemainderReport& r);
nlohmann::json to_json(const ComparisonReport& r);

/// Uniform sample of the ball B(center, radius).
std::vector<std::vector<double>> sample_ball(std::span<const double> center, double radius, int count,
                                             std::uint64_t seed);

}  // namespace kfplab
