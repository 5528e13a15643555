#include "kfplab/point_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "kfplab/errors.hpp"

namespace kfplab {

namespace {

constexpr double kEigenZeroRel = 1e-12;
constexpr double kSymmetryRel = 1e-12;

double multinomial(const MultiIndex& alpha) {
  MultiIndex total{order(alpha)};
  return factorial(total) / factorial(alpha);
}

}  // namespace

DerivativeBank::DerivativeBank(Polynomial potential) : potential_(std::move(potential)) {
  const int d = dimension();
  const int r = degree();
  auto compile = [](const Polynomial& p) {
    Compiled c;
    for (const auto& [alpha, coef] : p.terms()) {
      c.coef.push_back(coef);
      c.exps.insert(c.exps.end(), alpha.begin(), alpha.end());
    }
    return c;
  };
  value_ = compile(potential_);
  order_start_.assign(static_cast<std::size_t>(r) + 2, 0);
  for (int n = 1; n <= r; ++n) {
    order_start_[n] = entries_.size();
    for (auto& alpha : multi_indices_of_order(d, n)) {
      Entry e{alpha, n, multinomial(alpha), compile(potential_.derivative(alpha))};
      entries_.push_back(std::move(e));
    }
  }
  order_start_[r + 1] = entries_.size();
}

void DerivativeBank::check_point(std::span<const double> q) const {
  if (static_cast<int>(q.size()) != dimension()) {
    throw InputError("point has length " + std::to_string(q.size()) +
                     ", polynomial dimension is " + std::to_string(dimension()));
  }
}

std::vector<double> DerivativeBank::power_table(std::span<const double> q) const {
  const int d = dimension();
  const int stride = degree() + 1;
  std::vector<double> pw(static_cast<std::size_t>(d * stride));
  for (int i = 0; i < d; ++i) {
    double x = 1.0;
    for (int k = 0; k < stride; ++k) {
      pw[i * stride + k] = x;
      x *= q[i];
    }
  }
  return pw;
}

double DerivativeBank::eval(const Compiled& c, const std::vector<double>& pw) const {
  const int d = dimension();
  const int stride = degree() + 1;
  double sum = 0.0;
  for (std::size_t t = 0; t < c.coef.size(); ++t) {
    double v = c.coef[t];
    const int* e = &c.exps[t * d];
    for (int i = 0; i < d; ++i) v *= pw[i * stride + e[i]];
    sum += v;
  }
  return sum;
}

double DerivativeBank::value(std::span<const double> q) const {
  check_point(q);
  return eval(value_, power_table(q));
}

Eigen::VectorXd DerivativeBank::gradient(std::span<const double> q) const {
  check_point(q);
  const int d = dimension();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
  if (degree() < 1) return g;
  const auto pw = power_table(q);
  // order-1 indices come out as e_1, e_2, ... e_d
  for (int i = 0; i < d; ++i) g[i] = eval(entries_[order_start_[1] + i].poly, pw);
  return g;
}

Eigen::MatrixXd DerivativeBank::hessian(std::span<const double> q) const {
  check_point(q);
  const int d = dimension();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  if (degree() < 2) return h;
  const auto pw = power_table(q);
  for (std::size_t k = order_start_[2]; k < order_start_[3]; ++k) {
    const auto& alpha = entries_[k].alpha;
    int i = -1, j = -1;
    for (int a = 0; a < d; ++a) {
      for (int m = 0; m < alpha[a]; ++m) (i < 0 ? i : j) = a;
    }
    const double v = eval(entries_[k].poly, pw);
    h(i, j) = v;
    h(j, i) = v;
  }
  return h;
}

double DerivativeBank::derivative(const MultiIndex& alpha, std::span<const double> q) const {
  check_point(q);
  const int n = order(alpha);
  if (n == 0) return value(q);
  if (n > degree()) return 0.0;
  for (std::size_t k = order_start_[n]; k < order_start_[n + 1]; ++k) {
    if (entries_[k].alpha == alpha) return eval(entries_[k].poly, power_table(q));
  }
  throw InputError("multi-index dimension mismatch");
}

double DerivativeBank::r_geq(int n, std::span<const double> q, IndexConvention conv) const {
  check_point(q);
  if (n < 1) throw InputError("R^{>=n} requires n >= 1");
  const int r = degree();
  if (n > r) return 0.0;
  const auto pw = power_table(q);
  double sum = 0.0;
  for (std::size_t k = order_start_[n]; k < order_start_[r + 1]; ++k) {
    const auto& e = entries_[k];
    if (e.poly.coef.empty()) continue;
    const double v = std::abs(eval(e.poly, pw));
    if (v == 0.0) continue;
    const double w = conv == IndexConvention::Distinct ? 1.0 : e.multiplicity;
    sum += w * std::pow(v, 1.0 / e.order);
  }
  return sum;
}

double DerivativeBank::r_eq(int n, std::span<const double> q, IndexConvention conv) const {
  check_point(q);
  if (n < 1) throw InputError("R^{=n} requires n >= 1");
  if (n > degree()) return 0.0;
  const auto pw = power_table(q);
  double sum = 0.0;
  for (std::size_t k = order_start_[n]; k < order_start_[n + 1]; ++k) {
    const auto& e = entries_[k];
    if (e.poly.coef.empty()) continue;
    const double v = std::abs(eval(e.poly, pw));
    if (v == 0.0) continue;
    const double w = conv == IndexConvention::Distinct ? 1.0 : e.multiplicity;
    sum += w * std::pow(v, 1.0 / n);
  }
  return sum;
}

std::vector<double> DerivativeBank::r_eq_all(std::span<const double> q, IndexConvention conv) const {
  check_point(q);
  const int r = degree();
  std::vector<double> out(static_cast<std::size_t>(r), 0.0);
  const auto pw = power_table(q);
  for (const auto& e : entries_) {
    if (e.poly.coef.empty()) continue;
    const double v = std::abs(eval(e.poly, pw));
    if (v == 0.0) continue;
    const double w = conv == IndexConvention::Distinct ? 1.0 : e.multiplicity;
    out[e.order - 1] += w * std::pow(v, 1.0 / e.order);
  }
  return out;
}

TraceSplit trace_split_from_eigenvalues(const Eigen::VectorXd& eigenvalues, double frobenius) {
  const double zero = kEigenZeroRel * frobenius;
  TraceSplit s;
  for (double nu : eigenvalues) {
    if (std::abs(nu) < zero) continue;
    if (nu > 0.0) s.tr_plus += nu;
    else s.tr_minus -= nu;
  }
  return s;
}

TraceSplit hessian_trace_split(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols()) throw InputError("Hessian must be square");
  const double frob = h.norm();
  const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryRel * frob) throw InputError("matrix is not symmetric");
  if (frob == 0.0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return trace_split_from_eigenvalues(es.eigenvalues(), frob);
}

double log_weight(double s) {
  if (!(s >= 1.0)) throw InputError("log weight L(s) needs s >= 1");
  return (s + 1.0) / std::log(s + 1.0);
}

SigmaSides sigma_sides(double kappa, double gradient_norm, double hessian_frobenius, double r3) {
  const double r3sq = r3 * r3;
  return {std::pow(gradient_norm, 4.0 / 3.0), kappa * (hessian_frobenius + r3sq * r3sq + 1.0)};
}

PointAnalysis analyze_point(const DerivativeBank& bank, std::span<const double> q,
                            std::span<const double> kappas, bool both_conventions) {
  if (static_cast<int>(q.size()) != bank.dimension()) {
    throw InputError("point has length " + std::to_string(q.size()) +
                     ", polynomial dimension is " + std::to_string(bank.dimension()));
  }
  PointAnalysis a;
  a.point.assign(q.begin(), q.end());
  a.gradient = bank.gradient(q);
  a.gradient_norm = a.gradient.norm();
  a.hessian = bank.hessian(q);
  a.hessian_frobenius = a.hessian.norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.hessian, Eigen::EigenvaluesOnly);
  a.eigenvalues = es.eigenvalues();
  const auto split = trace_split_from_eigenvalues(a.eigenvalues, a.hessian_frobenius);
  a.tr_plus = split.tr_plus;
  a.tr_minus = split.tr_minus;

  const int r = bank.degree();
  auto fill = [&](IndexConvention conv, std::map<int, double>& geq, std::map<int, double>& eq) {
    const auto per_order = bank.r_eq_all(q, conv);
    double tail = 0.0;
    for (int n = r; n >= 1; --n) {
      tail += per_order[n - 1];
      eq[n] = per_order[n - 1];
      geq[n] = tail;
    }
  };
  fill(IndexConvention::Distinct, a.r_geq, a.r_eq);
  if (both_conventions) fill(IndexConvention::OrderedTuple, a.r_geq_ordered, a.r_eq_ordered);

  const double r3 = r >= 3 ? a.r_geq.at(3) : 0.0;
  for (double kappa : kappas) {
    if (!(kappa > 0.0)) throw InputError("kappa must be positive");
    const auto s = sigma_sides(kappa, a.gradient_norm, a.hessian_frobenius, r3);
    a.sigma.push_back({kappa, s.member(), s.lhs, s.rhs});
  }
  return a;
}

PointAnalysis analyze_point(const Polynomial& poly, std::span<const double> q,
                            std::span<const double> kappas, bool both_conventions) {
  return analyze_point(DerivativeBank(poly), q, kappas, both_conventions);
}

nlohmann::json to_json(const PointAnalysis& a) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json h = nlohmann::json::array();
  for (Eigen::Index i = 0; i < a.hessian.rows(); ++i) {
    Eigen::VectorXd row = a.hessian.row(i).transpose();
    h.push_back(vec(row));
  }
  auto by_order = [](const std::map<int, double>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [n, v] : m) j[std::to_string(n)] = v;
    return j;
  };
  nlohmann::json sigma = nlohmann::json::array();
  for (const auto& s : a.sigma) {
    sigma.push_back({{"kappa", s.kappa}, {"member", s.member}, {"lhs", s.lhs}, {"rhs", s.rhs}});
  }
  nlohmann::json j = {{"point", a.point},
                      {"gradient", vec(a.gradient)},
                      {"gradient_norm", a.gradient_norm},
                      {"hessian", h},
                      {"hessian_frobenius", a.hessian_frobenius},
                      {"eigenvalues", vec(a.eigenvalues)},
                      {"tr_plus", a.tr_plus},
                      {"tr_minus", a.tr_minus},
                      {"r_geq", by_order(a.r_geq)},
                      {"r_eq", by_order(a.r_eq)},
                      {"sigma", sigma}};
  if (!a.r_geq_ordered.empty()) {
    j["r_geq_ordered_tuples"] = by_order(a.r_geq_ordered);
    j["r_eq_ordered_tuples"] = by_order(a.r_eq_ordered);
  }
  return j;
}

}  // namespace kfplab
