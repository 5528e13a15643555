#include "kfplab/discrete_operator.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <unsupported/Eigen/KroneckerProduct>

#include "kfplab/errors.hpp"

namespace kfplab {

namespace {

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

SparseMatrix identity(std::size_t n) {
  SparseMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setIdentity();
  return m;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out = Eigen::kroneckerProduct(a, b);
  out.makeCompressed();
  return out;
}

SparseMatrix banded(int n, const std::vector<std::pair<int, double>>& stencil) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    for (const auto& [off, c] : stencil) {
      const int j = i + off;
      if (j >= 0 && j < n && c != 0.0) t.emplace_back(i, j, c);
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

void check_grid(const DiscreteGrid& g, bool needs_p) {
  if (g.d < 1 || g.d > 2) throw InputError("discrete operators support d in {1, 2}");
  if (g.nq < 8) throw InputError("grid needs Nq >= 8");
  if (needs_p && g.np < 4) throw InputError("grid needs Np >= 4");
  if (!(g.lq > 0.0)) throw InputError("grid half-width Lq must be positive");
  if (g.fd_order != 2 && g.fd_order != 4) throw InputError("finite-difference order must be 2 or 4");
  const std::size_t n = needs_p ? g.phase_size() : g.q_size();
  const std::size_t budget = matrix_budget();
  if (n > budget) {
    throw BudgetError("operator dimension " + std::to_string(n) + " exceeds the matrix budget " +
                          std::to_string(budget) + " (override with " + kBudgetVariable + ")",
                      n, budget);
  }
}

}  // namespace

std::size_t matrix_budget() {
  const char* env = std::getenv(kBudgetVariable);
  if (env == nullptr || *env == '\0') return kDefaultBudget;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0' || v == 0) {
    throw InputError(std::string(kBudgetVariable) + " must be a positive integer, got '" + env + "'");
  }
  return static_cast<std::size_t>(v);
}

std::size_t DiscreteGrid::q_size() const { return ipow(static_cast<std::size_t>(nq), d); }
std::size_t DiscreteGrid::p_size() const { return ipow(static_cast<std::size_t>(np), d); }

std::vector<double> DiscreteGrid::q_point(std::size_t iq) const {
  std::vector<double> q(d);
  for (int i = d - 1; i >= 0; --i) {
    q[i] = node(static_cast<int>(iq % nq));
    iq /= nq;
  }
  return q;
}

std::vector<int> DiscreteGrid::p_index(std::size_t ip) const {
  std::vector<int> n(d);
  for (int i = d - 1; i >= 0; --i) {
    n[i] = static_cast<int>(ip % np);
    ip /= np;
  }
  return n;
}

nlohmann::json to_json(const DiscreteGrid& g) {
  return {{"d", g.d}, {"lq", g.lq}, {"nq", g.nq}, {"np", g.np}, {"h", g.h()}, {"fd_order", g.fd_order}};
}

std::string to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::KFP: return "kfp";
    case OperatorKind::Witten: return "witten";
    case OperatorKind::Op: return "o_p";
    case OperatorKind::Multiplier: return "multiplier";
  }
  return "unknown";
}

SparseMatrix first_derivative(int nq, double h, int order) {
  if (order == 2) return banded(nq, {{-1, -0.5 / h}, {1, 0.5 / h}});
  if (order == 4) {
    const double s = 1.0 / (12.0 * h);
    return banded(nq, {{-2, s}, {-1, -8.0 * s}, {1, 8.0 * s}, {2, -s}});
  }
  throw InputError("finite-difference order must be 2 or 4");
}

SparseMatrix laplacian(int nq, double h, int order) {
  if (order == 2) {
    const double s = 1.0 / (h * h);
    return banded(nq, {{-1, s}, {0, -2.0 * s}, {1, s}});
  }
  if (order == 4) {
    const double s = 1.0 / (12.0 * h * h);
    return banded(nq, {{-2, -s}, {-1, 16.0 * s}, {0, -30.0 * s}, {1, 16.0 * s}, {2, -s}});
  }
  throw InputError("finite-difference order must be 2 or 4");
}

SparseMatrix hermite_position(int np) {
  std::vector<Eigen::Triplet<double>> t;
  for (int n = 0; n + 1 < np; ++n) {
    const double v = std::sqrt((n + 1) / 2.0);
    t.emplace_back(n, n + 1, v);
    t.emplace_back(n + 1, n, v);
  }
  SparseMatrix m(np, np);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix hermite_derivative(int np) {
  // d/dp phi_n = (sqrt(n) phi_{n-1} - sqrt(n+1) phi_{n+1}) / sqrt(2)
  std::vector<Eigen::Triplet<double>> t;
  for (int n = 0; n + 1 < np; ++n) {
    const double v = std::sqrt((n + 1) / 2.0);
    t.emplace_back(n, n + 1, v);
    t.emplace_back(n + 1, n, -v);
  }
  SparseMatrix m(np, np);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix hermite_oscillator(int np) {
  std::vector<Eigen::Triplet<double>> t;
  for (int n = 0; n < np; ++n) t.emplace_back(n, n, n + 0.5);
  SparseMatrix m(np, np);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix on_axis(const SparseMatrix& a, int axis, int d, int n) {
  SparseMatrix out = axis == 0 ? a : identity(static_cast<std::size_t>(n));
  for (int i = 1; i < d; ++i) out = kron(out, i == axis ? a : identity(static_cast<std::size_t>(n)));
  return out;
}

namespace {

SparseMatrix oscillator_total(const DiscreteGrid& g) {
  SparseMatrix op(static_cast<Eigen::Index>(g.p_size()), static_cast<Eigen::Index>(g.p_size()));
  for (int i = 0; i < g.d; ++i) op += on_axis(hermite_oscillator(g.np), i, g.d, g.np);
  return op;
}

SparseMatrix diag(const Eigen::VectorXd& v) {
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) t.emplace_back(i, i, v[i]);
  }
  SparseMatrix m(v.size(), v.size());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

DiscreteOperator assemble_kfp(const DerivativeBank& bank, const DiscreteGrid& grid) {
  if (bank.dimension() != grid.d) throw InputError("potential and grid dimensions differ");
  check_grid(grid, true);
  const int d = grid.d;
  const std::size_t nqd = grid.q_size();
  const SparseMatrix dq = first_derivative(grid.nq, grid.h(), grid.fd_order);

  std::vector<Eigen::VectorXd> dv(d, Eigen::VectorXd(static_cast<Eigen::Index>(nqd)));
  for (std::size_t iq = 0; iq < nqd; ++iq) {
    const auto g = bank.gradient(grid.q_point(iq));
    for (int i = 0; i < d; ++i) dv[i][static_cast<Eigen::Index>(iq)] = g[i];
  }

  SparseMatrix k = kron(identity(nqd), oscillator_total(grid));
  for (int i = 0; i < d; ++i) {
    const SparseMatrix p_i = on_axis(hermite_position(grid.np), i, d, grid.np);
    const SparseMatrix dp_i = on_axis(hermite_derivative(grid.np), i, d, grid.np);
    k += kron(on_axis(dq, i, d, grid.nq), p_i);
    k -= kron(diag(dv[i]), dp_i);
  }
  k.prune(0.0);
  k.makeCompressed();
  return {std::move(k), grid, OperatorKind::KFP, false};
}

DiscreteOperator assemble_witten(const DerivativeBank& bank, const DiscreteGrid& grid) {
  if (bank.dimension() != grid.d) throw InputError("potential and grid dimensions differ");
  check_grid(grid, false);
  const int d = grid.d;
  const std::size_t nqd = grid.q_size();
  Eigen::VectorXd pot(static_cast<Eigen::Index>(nqd));
  for (std::size_t iq = 0; iq < nqd; ++iq) {
    const auto q = grid.q_point(iq);
    pot[static_cast<Eigen::Index>(iq)] = bank.gradient(q).squaredNorm() - bank.hessian(q).trace();
  }
  const SparseMatrix lap = laplacian(grid.nq, grid.h(), grid.fd_order);
  SparseMatrix w = diag(pot);
  for (int i = 0; i < d; ++i) w -= on_axis(lap, i, d, grid.nq);
  w.prune(0.0);
  w.makeCompressed();
  return {std::move(w), grid, OperatorKind::Witten, true};
}

DiscreteOperator assemble_op(const DiscreteGrid& grid) {
  if (grid.d < 1 || grid.d > 2) throw InputError("discrete operators support d in {1, 2}");
  if (grid.np < 4) throw InputError("grid needs Np >= 4");
  SparseMatrix op = oscillator_total(grid);
  op.makeCompressed();
  return {std::move(op), grid, OperatorKind::Op, true};
}

DiscreteOperator diagonal_multiplier(const DiscreteGrid& grid, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != grid.phase_size() &&
      static_cast<std::size_t>(v.size()) != grid.q_size()) {
    throw InputError("multiplier length matches neither the phase-space nor the q-grid size");
  }
  return {diag(v), grid, OperatorKind::Multiplier, true};
}

double accretivity_defect(const DiscreteOperator& kfp, const Eigen::VectorXd& u) {
  const auto& g = kfp.grid;
  const SparseMatrix op = kron(identity(g.q_size()), oscillator_total(g));
  return u.dot(kfp.matrix * u) - u.dot(op * u);
}

double norm_bound(const SparseMatrix& m) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < m.outerSize(); ++i) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

std::string matrix_market_string(const SparseMatrix& m) {
  std::string out = "%%MatrixMarket matrix coordinate real general\n";
  char buf[96];
  std::snprintf(buf, sizeof buf, "%lld %lld %lld\n", static_cast<long long>(m.rows()),
                static_cast<long long>(m.cols()), static_cast<long long>(m.nonZeros()));
  out += buf;
  for (Eigen::Index i = 0; i < m.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) {
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(it.row() + 1),
                    static_cast<long long>(it.col() + 1), it.value());
      out += buf;
    }
  }
  return out;
}

void write_matrix_market(const SparseMatrix& m, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << matrix_market_string(m);
}

}  // namespace kfplab
