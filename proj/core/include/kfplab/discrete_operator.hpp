#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "json.hpp"
#include "kfplab/point_analysis.hpp"

namespace kfplab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Environment variable that overrides the default matrix budget.
inline constexpr const char* kBudgetVariable = "KFPLAB_MATRIX_BUDGET";
inline constexpr std::size_t kDefaultBudget = 400'000;

/// Current budget on operator dimension (environment override or default).
std::size_t matrix_budget();

/// Phase-space discretization: Nq interior nodes per q-axis on [-Lq, Lq]
/// (Dirichlet truncation, spacing 2 Lq / (Nq + 1)) and the first Np Hermite
/// functions per p-axis. Unknowns are ordered q-major: index = iq * Np^d + ip,
/// with axis 0 slowest inside both multi-indices.
struct DiscreteGrid {
  int d = 1;
  double lq = 8.0;
  int nq = 64;
  int np = 8;
  int fd_order = 4;  // 2 or 4

  double h() const { return 2.0 * lq / (nq + 1); }
  double node(int i) const { return -lq + (i + 1) * h(); }
  std::size_t q_size() const;
  std::size_t p_size() const;
  std::size_t phase_size() const { return q_size() * p_size(); }
  /// q coordinates of flat q index iq.
  std::vector<double> q_point(std::size_t iq) const;
  /// Hermite multi-index of flat p index ip.
  std::vector<int> p_index(std::size_t ip) const;
};

nlohmann::json to_json(const DiscreteGrid& g);

enum class OperatorKind { KFP, Witten, Op, Multiplier };
std::string to_string(OperatorKind k);

struct DiscreteOperator {
  SparseMatrix matrix;
  DiscreteGrid grid;
  OperatorKind kind = OperatorKind::KFP;
  bool symmetric = false;

  std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const { return matrix * u; }
};

/// 1-d building blocks.
SparseMatrix first_derivative(int nq, double h, int order);
SparseMatrix laplacian(int nq, double h, int order);  // approximates d^2/dq^2
SparseMatrix hermite_position(int np);                 // p
SparseMatrix hermite_derivative(int np);               // d/dp, antisymmetric
SparseMatrix hermite_oscillator(int np);               // O_p = diag(n + 1/2)

/// Operator acting on axis `axis` of a d-fold tensor product of n-point spaces.
SparseMatrix on_axis(const SparseMatrix& a, int axis, int d, int n);

/// K_V = sum_i p_i d_{q_i} - d_{q_i}V d_{p_i} + O_p. Requires d in {1, 2}.
DiscreteOperator assemble_kfp(const DerivativeBank& bank, const DiscreteGrid& grid);
/// -Delta_q + |grad V|^2 - Delta V on the q-grid.
DiscreteOperator assemble_witten(const DerivativeBank& bank, const DiscreteGrid& grid);
/// O_p alone on the Hermite space (dimension Np^d).
DiscreteOperator assemble_op(const DiscreteGrid& grid);
/// Diagonal multiplier on phase space, value f(q) ⊗ g(p-index).
DiscreteOperator diagonal_multiplier(const DiscreteGrid& grid, const Eigen::VectorXd& diag);

/// Re<u, K u> - <u, O_p u>; zero up to rounding for the assembled KFP.
double accretivity_defect(const DiscreteOperator& kfp, const Eigen::VectorXd& u);

/// Matrix Market coordinate/real/general text, 1-based, %.17g values.
void write_matrix_market(const SparseMatrix& m, const std::string& path);
std::string matrix_market_string(const SparseMatrix& m);

/// Upper bound on the 2-norm: max row sum of |a_ij|.
double norm_bound(const SparseMatrix& m);

}  // namespace kfplab
