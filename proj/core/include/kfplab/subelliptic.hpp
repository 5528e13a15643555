#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "kfplab/discrete_operator.hpp"

namespace kfplab {

/// The four weighted norms on the right of the global estimate
///   ||K u||^2 + C ||u||^2 >= (1/C) (||L(O_p)u||^2 + ||L(<grad V>^{2/3})u||^2
///                                  + ||L(<Hess V>^{1/2})u||^2 + ||L(<D_q>^{2/3})u||^2).
/// L(O_p) uses L(max(n + d/2, 1)) so the weight stays inside L's domain s >= 1;
/// L(<D_q>^{2/3}) is applied through the eigendecomposition of the discrete
/// Dirichlet Laplacian, one q-axis at a time.
class SubellipticWeights {
 public:
  SubellipticWeights(const DerivativeBank& bank, const DiscreteGrid& grid);

  struct Terms {
    double op = 0.0;
    double gradient = 0.0;
    double hessian = 0.0;
    double dq = 0.0;
    double total() const { return op + gradient + hessian + dq; }
  };
  Terms evaluate(const Eigen::VectorXd& u) const;

 private:
  DiscreteGrid grid_;
  Eigen::VectorXd op_weight_;    // on the p index
  Eigen::VectorXd grad_weight_;  // on the q index
  Eigen::VectorXd hess_weight_;
  Eigen::MatrixXd modes_;        // eigenvectors of -Laplacian (1-d)
  Eigen::VectorXd lambda_;       // its eigenvalues
};

struct TestOutcome {
  std::string label;
  double ku2 = 0.0;
  double u2 = 0.0;
  SubellipticWeights::Terms rhs;
  double required_c = 0.0;  // smallest C for this u
  double ratio = 0.0;       // rhs / (||Ku||^2 + ||u||^2)
};

struct EstimateReport {
  DiscreteGrid grid;
  std::uint64_t seed = 0;
  int trials = 0;
  double c = 1.0;
  std::string worst;
  std::vector<TestOutcome> tests;
};

/// Smallest C >= 1 making the estimate hold on `trials` smooth random u plus
/// a structured set of Gaussian x Hermite states.
EstimateReport subelliptic_report(const DerivativeBank& bank, const DiscreteGrid& grid, int trials,
                                  std::uint64_t seed);

struct RefinementTrace {
  std::vector<EstimateReport> runs;
  double growth = 0.0;  // C(last) / C(first) - 1
};

RefinementTrace subelliptic_refinement(const DerivativeBank& bank, const std::vector<DiscreteGrid>& grids,
                                       int trials, std::uint64_t seed);

/// C from ||Ku||^2 + C ||u||^2 = rhs / C.
double required_constant(double ku2, double u2, double rhs);

nlohmann::json to_json(const EstimateReport& r);
nlohmann::json to_json(const RefinementTrace& r);

}  // namespace kfplab
