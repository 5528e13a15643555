#include "kfplab/subelliptic.hpp"

#include <algorithm>
#include <cmath>

#include "kfplab/errors.hpp"
#include "kfplab/test_functions.hpp"

namespace kfplab {

SubellipticWeights::SubellipticWeights(const DerivativeBank& bank, const DiscreteGrid& grid) : grid_(grid) {
  if (bank.dimension() != grid.d) throw InputError("potential and grid dimensions differ");
  const std::size_t nqd = grid.q_size(), pn = grid.p_size();
  op_weight_.resize(static_cast<Eigen::Index>(pn));
  for (std::size_t ip = 0; ip < pn; ++ip) {
    double level = 0.5 * grid.d;
    for (int n : grid.p_index(ip)) level += n;
    op_weight_[static_cast<Eigen::Index>(ip)] = log_weight(std::max(level, 1.0));
  }
  grad_weight_.resize(static_cast<Eigen::Index>(nqd));
  hess_weight_.resize(static_cast<Eigen::Index>(nqd));
  for (std::size_t iq = 0; iq < nqd; ++iq) {
    const auto q = grid.q_point(iq);
    const double g = bank.gradient(q).norm();
    const double h = bank.hessian(q).norm();
    grad_weight_[static_cast<Eigen::Index>(iq)] = log_weight(std::pow(1.0 + g * g, 1.0 / 3.0));
    hess_weight_[static_cast<Eigen::Index>(iq)] = log_weight(std::pow(1.0 + h * h, 0.25));
  }
  const Eigen::MatrixXd lap = -Eigen::MatrixXd(laplacian(grid.nq, grid.h(), grid.fd_order));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
  modes_ = es.eigenvectors();
  lambda_ = es.eigenvalues();
}

SubellipticWeights::Terms SubellipticWeights::evaluate(const Eigen::VectorXd& u) const {
  const std::size_t nqd = grid_.q_size(), pn = grid_.p_size();
  if (static_cast<std::size_t>(u.size()) != nqd * pn) throw InputError("test vector has the wrong length");
  Terms t;
  for (std::size_t iq = 0; iq < nqd; ++iq) {
    const auto seg = u.segment(static_cast<Eigen::Index>(iq * pn), static_cast<Eigen::Index>(pn));
    const double s2 = seg.squaredNorm();
    t.op += seg.cwiseProduct(op_weight_).squaredNorm();
    const double gw = grad_weight_[static_cast<Eigen::Index>(iq)];
    const double hw = hess_weight_[static_cast<Eigen::Index>(iq)];
    t.gradient += gw * gw * s2;
    t.hessian += hw * hw * s2;
  }
  // transform each p-slice to the Laplacian eigenbasis; the basis is orthogonal
  // so the norm is the sum of |L((1 + lambda)^{1/3})|^2 |coefficient|^2
  const int nq = grid_.nq;
  const auto w = [](double lam) { return log_weight(std::pow(1.0 + std::max(lam, 0.0), 1.0 / 3.0)); };
  if (grid_.d == 1) {
    const Eigen::Map<const Eigen::MatrixXd> slices(u.data(), static_cast<Eigen::Index>(pn), nq);  // p x q
    const Eigen::MatrixXd c = slices * modes_;
    for (int k = 0; k < nq; ++k) t.dq += w(lambda_[k]) * w(lambda_[k]) * c.col(k).squaredNorm();
  } else {
    for (std::size_t ip = 0; ip < pn; ++ip) {
      Eigen::MatrixXd f(nq, nq);
      for (int i = 0; i < nq; ++i) {
        for (int j = 0; j < nq; ++j) f(i, j) = u[static_cast<Eigen::Index>((i * nq + j) * pn + ip)];
      }
      const Eigen::MatrixXd c = modes_.transpose() * f * modes_;
      for (int i = 0; i < nq; ++i) {
        for (int j = 0; j < nq; ++j) {
          const double wij = w(lambda_[i] + lambda_[j]);
          t.dq += wij * wij * c(i, j) * c(i, j);
        }
      }
    }
  }
  return t;
}

double required_constant(double ku2, double u2, double rhs) {
  if (!(u2 > 0.0)) throw InputError("zero test vector");
  return (-ku2 + std::sqrt(ku2 * ku2 + 4.0 * u2 * rhs)) / (2.0 * u2);
}

EstimateReport subelliptic_report(const DerivativeBank& bank, const DiscreteGrid& grid, int trials,
                                  std::uint64_t seed) {
  if (trials < 0) throw InputError("trials must be nonnegative");
  const DiscreteOperator k = assemble_kfp(bank, grid);
  const SubellipticWeights weights(bank, grid);

  std::vector<std::pair<std::string, Eigen::VectorXd>> tests;
  int t = 0;
  for (auto& u : smooth_phase_vectors(grid, trials, seed)) tests.emplace_back("random_" + std::to_string(t++), std::move(u));
  // Gaussian x Hermite states at the origin, on the axes and on the diagonal
  const double off = 0.4 * grid.lq;
  std::vector<std::vector<double>> centers;
  if (grid.d == 1) {
    centers = {{0.0}, {off}, {-off}};
  } else {
    centers = {{0.0, 0.0}, {off, 0.0}, {0.0, off}, {off, off}};
  }
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (int n = 0; n < std::min(grid.np, 3); ++n) {
      std::vector<int> herm(grid.d, 0);
      herm[0] = n;
      tests.emplace_back("gauss_" + std::to_string(c) + "_h" + std::to_string(n),
                         gaussian_hermite(grid, centers[c], 1.0, herm));
    }
  }

  EstimateReport rep;
  rep.grid = grid;
  rep.seed = seed;
  rep.trials = trials;
  rep.c = 1.0;
  for (auto& [label, u] : tests) {
    TestOutcome o;
    o.label = label;
    o.u2 = u.squaredNorm();
    if (!(o.u2 > 0.0)) continue;
    o.ku2 = (k.matrix * u).squaredNorm();
    o.rhs = weights.evaluate(u);
    o.required_c = required_constant(o.ku2, o.u2, o.rhs.total());
    o.ratio = o.rhs.total() / (o.ku2 + o.u2);
    if (o.required_c > rep.c) {
      rep.c = o.required_c;
      rep.worst = label;
    }
    rep.tests.push_back(std::move(o));
  }
  return rep;
}

RefinementTrace subelliptic_refinement(const DerivativeBank& bank, const std::vector<DiscreteGrid>& grids,
                                       int trials, std::uint64_t seed) {
  if (grids.empty()) throw InputError("no grids given");
  RefinementTrace out;
  for (const auto& g : grids) out.runs.push_back(subelliptic_report(bank, g, trials, seed));
  out.growth = out.runs.back().c / out.runs.front().c - 1.0;
  return out;
}

nlohmann::json to_json(const EstimateReport& r) {
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& t : r.tests) {
    tests.push_back({{"label", t.label},
                     {"Ku2", t.ku2},
                     {"u2", t.u2},
                     {"rhs", {{"L_Op", t.rhs.op}, {"L_grad", t.rhs.gradient}, {"L_hess", t.rhs.hessian}, {"L_Dq", t.rhs.dq}}},
                     {"required_C", t.required_c},
                     {"ratio", t.ratio}});
  }
  return {{"C", r.c}, {"grid", to_json(r.grid)}, {"seed", r.seed}, {"trials", r.trials}, {"worst", r.worst}, {"tests", tests}};
}

nlohmann::json to_json(const RefinementTrace& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& x : r.runs) runs.push_back(to_json(x));
  return {{"refinement_trace", runs}, {"growth", r.growth}};
}

}  // namespace kfplab
