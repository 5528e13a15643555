#include "kfplab/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/SparseLU>

#include "kfplab/errors.hpp"

namespace kfplab {

namespace {

Eigen::VectorXd random_unit(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v / v.norm();
}

// two passes of classical Gram-Schmidt against the first `cols` columns
Eigen::VectorXd orthogonalize(const Eigen::MatrixXd& basis, Eigen::Index cols, Eigen::VectorXd& w) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(cols);
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd c = basis.leftCols(cols).transpose() * w;
    w -= basis.leftCols(cols) * c;
    h += c;
  }
  return h;
}

std::vector<Eigen::Index> target_order(const Eigen::VectorXd& theta, RitzTarget target) {
  std::vector<Eigen::Index> idx(theta.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return target == RitzTarget::SmallestAlgebraic ? theta[a] < theta[b]
                                                   : std::abs(theta[a]) > std::abs(theta[b]);
  });
  return idx;
}

}  // namespace

EigenPairs thick_restart_lanczos(const LinearMap& a, Eigen::Index n, int k, RitzTarget target,
                                 const LanczosOptions& opts) {
  if (n < 1) throw InputError("empty operator");
  if (k < 1 || k > n) throw InputError("requested eigenpair count out of range");
  const Eigen::Index m =
      std::min<Eigen::Index>(n, opts.max_basis > 0 ? opts.max_basis : std::max(2 * k + 20, 40));
  if (m <= k && m < n) throw InputError("Lanczos basis must exceed the requested count");

  std::mt19937_64 rng(opts.seed);
  Eigen::MatrixXd basis(n, m + 1);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m + 1);
  basis.col(0) = random_unit(n, rng);
  Eigen::VectorXd w(n);
  EigenPairs out;
  Eigen::Index kept = 0;

  while (true) {
    double beta = 0.0;
    for (Eigen::Index j = kept; j < m; ++j) {
      a(basis.col(j), w);
      ++out.matvecs;
      const Eigen::VectorXd c = orthogonalize(basis, j + 1, w);
      for (Eigen::Index i = 0; i <= j; ++i) h(i, j) = h(j, i) = c[i];
      beta = w.norm();
      out.norm_estimate = std::max(out.norm_estimate, std::abs(c[j]));
      if (beta <= 1e-13 * std::max(out.norm_estimate, 1e-300)) {
        beta = 0.0;
        if (j + 1 == m) break;
        // invariant subspace found: continue with a fresh orthogonal direction
        w = random_unit(n, rng);
        orthogonalize(basis, j + 1, w);
        basis.col(j + 1) = w / w.norm();
      } else {
        basis.col(j + 1) = w / beta;
        if (j + 1 < m) h(j + 1, j) = h(j, j + 1) = beta;
      }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.topLeftCorner(m, m));
    const Eigen::VectorXd& theta = es.eigenvalues();
    const Eigen::MatrixXd& y = es.eigenvectors();
    out.norm_estimate = std::max(out.norm_estimate, theta.cwiseAbs().maxCoeff());
    const auto order = target_order(theta, target);
    int done = 0;
    for (int i = 0; i < k; ++i) {
      if (std::abs(beta * y(m - 1, order[i])) <= opts.tol * out.norm_estimate) ++done;
    }
    const bool finished = done == k || m == n;
    if (finished || out.matvecs >= opts.max_matvecs) {
      out.converged = finished;
      out.values.resize(k);
      out.vectors.resize(n, k);
      for (int i = 0; i < k; ++i) {
        out.values[i] = theta[order[i]];
        out.vectors.col(i) = basis.leftCols(m) * y.col(order[i]);
        out.vectors.col(i).normalize();
      }
      return out;
    }

    kept = std::min<Eigen::Index>(m - 1, k + (m - k) / 2);
    Eigen::MatrixXd sel(m, kept);
    for (Eigen::Index i = 0; i < kept; ++i) sel.col(i) = y.col(order[i]);
    const Eigen::MatrixXd ritz = basis.leftCols(m) * sel;
    const Eigen::VectorXd next = basis.col(m);
    basis.leftCols(kept) = ritz;
    basis.col(kept) = next;
    h.setZero();
    for (Eigen::Index i = 0; i < kept; ++i) {
      h(i, i) = theta[order[i]];
      h(kept, i) = h(i, kept) = beta * sel(m - 1, i);
    }
  }
}

SpectrumResult low_spectrum(const DiscreteOperator& op, int k, const SpectrumOptions& opts) {
  if (k < 1 || k > 20) throw InputError("low_spectrum supports 1 <= k <= 20");
  const Eigen::Index n = op.matrix.rows();
  const std::size_t budget = matrix_budget();
  if (static_cast<std::size_t>(n) > budget) {
    throw BudgetError("operator dimension " + std::to_string(n) + " exceeds the matrix budget " +
                          std::to_string(budget) + " (override with " + kBudgetVariable + ")",
                      static_cast<std::size_t>(n), budget);
  }
  if (k > n) throw InputError("k exceeds the operator dimension");

  SpectrumResult res;
  res.mode = op.symmetric ? SpectrumMode::Eigenvalues : SpectrumMode::SingularValues;
  res.shift_invert = opts.shift_invert && static_cast<std::size_t>(n) <= opts.lu_limit;
  const SparseMatrix& a = op.matrix;
  const SparseMatrix at = a.transpose();
  LanczosOptions lo;
  lo.max_matvecs = opts.max_matvecs;
  lo.seed = opts.seed;

  EigenPairs pairs;
  if (res.shift_invert) {
    Eigen::SparseMatrix<double> col = a;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(col);
    if (lu.info() != Eigen::Success && op.symmetric) {
      // exactly singular: factor A + s I with a tiny s instead
      const double shift = 1e-10 * norm_bound(a);
      Eigen::SparseMatrix<double> id(n, n);
      id.setIdentity();
      col = col + shift * id;
      lu.compute(col);
    }
    if (lu.info() != Eigen::Success) throw ConvergenceError("sparse LU factorization failed: operator is singular");
    LinearMap apply;
    if (op.symmetric) {
      apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = lu.solve(x); };
    } else {
      // (K^T K)^{-1} x = K^{-1} K^{-T} x
      apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        const Eigen::VectorXd z = lu.transpose().solve(x);
        y = lu.solve(z);
      };
    }
    pairs = thick_restart_lanczos(apply, n, k, RitzTarget::LargestMagnitude, lo);
  } else {
    LinearMap apply;
    if (op.symmetric) {
      apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = a * x; };
    } else {
      apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        const Eigen::VectorXd z = a * x;
        y = at * z;
      };
    }
    pairs = thick_restart_lanczos(apply, n, k, RitzTarget::SmallestAlgebraic, lo);
  }
  res.matvecs = pairs.matvecs;

  const double na = norm_bound(a);
  res.norm_estimate = op.symmetric ? na : na * norm_bound(at);
  std::vector<std::pair<double, double>> found;
  bool ok = pairs.converged;
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd v = pairs.vectors.col(i);
    double lambda = 0.0, resid = 0.0;
    if (op.symmetric) {
      lambda = v.dot(a * v);
      resid = (a * v - lambda * v).norm();
    } else {
      const Eigen::VectorXd kv = a * v;
      const Eigen::VectorXd ktkv = at * kv;
      const double s2 = kv.squaredNorm();
      lambda = std::sqrt(s2);
      resid = (ktkv - s2 * v).norm();
    }
    const double rel = resid / res.norm_estimate;
    ok = ok && rel <= opts.residual_tol;
    found.emplace_back(lambda, rel);
  }
  std::sort(found.begin(), found.end(),
            [](const auto& x, const auto& y) { return std::abs(x.first) < std::abs(y.first); });
  for (const auto& [v, r] : found) {
    res.values.push_back(v);
    res.residuals.push_back(r);
  }
  res.converged = ok;
  return res;
}

std::vector<std::complex<double>> dense_eigenvalues(const DiscreteOperator& op) {
  if (op.matrix.rows() > 4000) throw BudgetError("dense eigensolve limited to dimension 4000", op.size(), 4000);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(op.matrix);
  Eigen::EigenSolver<Eigen::MatrixXd> es(dense, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver did not converge");
  std::vector<std::complex<double>> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](const auto& x, const auto& y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return ev;
}

nlohmann::json to_json(const SpectrumResult& r) {
  return {{"mode", r.mode == SpectrumMode::Eigenvalues ? "eigenvalues" : "singular_values"},
          {"values", r.values},
          {"relative_residuals", r.residuals},
          {"norm_estimate", r.norm_estimate},
          {"matvecs", r.matvecs},
          {"converged", r.converged},
          {"shift_invert", r.shift_invert}};
}

}  // namespace kfplab
