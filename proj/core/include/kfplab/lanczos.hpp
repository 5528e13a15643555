#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "kfplab/discrete_operator.hpp"

namespace kfplab {

using LinearMap = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

enum class RitzTarget { SmallestAlgebraic, LargestMagnitude };

struct LanczosOptions {
  int max_basis = 0;  // 0: min(n, max(2k + 20, 40))
  int max_matvecs = 5000;
  double tol = 1e-11;  // Ritz residual relative to the largest Ritz value seen
  std::uint64_t seed = 1;
};

struct EigenPairs {
  Eigen::VectorXd values;   // in target order
  Eigen::MatrixXd vectors;  // unit columns
  int matvecs = 0;
  bool converged = false;
  double norm_estimate = 0.0;
};

/// Thick-restart Lanczos with full reorthogonalization for a symmetric map.
EigenPairs thick_restart_lanczos(const LinearMap& a, Eigen::Index n, int k, RitzTarget target,
                                 const LanczosOptions& opts = {});

enum class SpectrumMode { Eigenvalues, SingularValues };

struct SpectrumOptions {
  int max_matvecs = 5000;
  bool shift_invert = true;  // sparse LU; turned off automatically above lu_limit
  std::size_t lu_limit = 200'000;
  double residual_tol = 1e-8;
  std::uint64_t seed = 1;
};

struct SpectrumResult {
  SpectrumMode mode = SpectrumMode::Eigenvalues;
  std::vector<double> values;     // ascending magnitude
  std::vector<double> residuals;  // relative to the norm estimate
  double norm_estimate = 0.0;
  int matvecs = 0;
  bool converged = false;  // Lanczos converged and every residual within tolerance
  bool shift_invert = false;
};

/// k smallest-magnitude eigenvalues of a symmetric operator, or k smallest
/// singular values of a nonsymmetric one (through K^T K). k <= 20.
SpectrumResult low_spectrum(const DiscreteOperator& op, int k, const SpectrumOptions& opts = {});

/// All eigenvalues of a small operator (dense solve, dimension <= 4000),
/// sorted by real part then imaginary part.
std::vector<std::complex<double>> dense_eigenvalues(const DiscreteOperator& op);

nlohmann::json to_json(const SpectrumResult& r);

}  // namespace kfplab
