#include "kfplab/quadratic_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "kfplab/errors.hpp"

namespace kfplab {

Eigen::VectorXd QuadraticModel::model_gradient(std::span<const double> q) const {
  Eigen::VectorXd x(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) x[i] = q[i] - base[i];
  return gradient + hessian * x;
}

QuadraticModel taylor_quadratic(const DerivativeBank& bank, std::span<const double> base) {
  const int d = bank.dimension();
  if (static_cast<int>(base.size()) != d) throw InputError("base point dimension mismatch");
  QuadraticModel m;
  m.center.assign(base.begin(), base.end());
  m.base = m.center;
  m.value = bank.value(base);
  m.gradient = bank.gradient(base);
  m.hessian = bank.hessian(base);

  Polynomial poly = Polynomial::constant(d, m.value);
  std::vector<Polynomial> shift;
  for (int i = 0; i < d; ++i) shift.push_back(Polynomial::variable(d, i) - Polynomial::constant(d, base[i]));
  for (int i = 0; i < d; ++i) {
    poly = poly + m.gradient[i] * shift[i];
    for (int j = 0; j < d; ++j) poly = poly + (0.5 * m.hessian(i, j)) * (shift[i] * shift[j]);
  }
  m.polynomial = std::move(poly);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.hessian);
  const double frob = m.hessian.norm();
  const auto split = trace_split_from_eigenvalues(es.eigenvalues(), frob);
  m.tr_plus = split.tr_plus;
  m.tr_minus = split.tr_minus;

  // component of g in ker H (H symmetric, so ker H is orthogonal to range H)
  Eigen::VectorXd null_part = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < d; ++k) {
    if (std::abs(es.eigenvalues()[k]) <= 1e-12 * frob) {
      const Eigen::VectorXd v = es.eigenvectors().col(k);
      null_part += v.dot(m.gradient) * v;
    }
  }
  m.min_gradient = null_part.norm();
  m.a_const = std::max(std::pow(1.0 + m.tr_plus, 2.0 / 3.0), 1.0 + m.tr_minus);
  const double lg = std::log(2.0 + m.tr_minus);
  m.b_const = std::max(std::pow(m.min_gradient, 4.0 / 3.0), (1.0 + m.tr_minus) / (lg * lg));
  m.t_j = 2.0 * std::pow(1.0 + frob * frob, 0.125);
  return m;
}

QuadraticModel taylor_quadratic(const Polynomial& poly, std::span<const double> base) {
  return taylor_quadratic(DerivativeBank(poly), base);
}

QuadraticModel localize_ball(const DerivativeBank& bank, std::span<const double> center, double radius,
                             double kappa, int per_axis) {
  const int d = bank.dimension();
  if (static_cast<int>(center.size()) != d) throw InputError("center dimension mismatch");
  if (!(radius > 0.0)) throw InputError("ball radius must be positive");
  if (!(kappa > 0.0)) throw InputError("kappa must be positive");
  if (per_axis < 2) throw InputError("ball lattice needs at least 2 points per axis");

  std::vector<int> idx(d, 0);
  std::vector<double> q(d);
  std::optional<std::vector<double>> complement;
  while (!complement) {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
      q[i] = center[i] - radius + 2.0 * radius * idx[i] / (per_axis - 1);
      r2 += (q[i] - center[i]) * (q[i] - center[i]);
    }
    if (r2 <= radius * radius) {
      const double g = bank.gradient(q).norm();
      const auto s = sigma_sides(kappa, g, bank.hessian(q).norm(), bank.r_geq(3, q));
      if (!s.member()) complement = q;
    }
    int k = d - 1;
    while (k >= 0 && ++idx[k] == per_axis) idx[k--] = 0;
    if (k < 0) break;
  }
  QuadraticModel m = taylor_quadratic(bank, complement ? std::span<const double>(*complement) : center);
  m.center.assign(center.begin(), center.end());
  m.kappa = kappa;
  m.in_j_kappa = !complement;
  return m;
}

double remainder_constant(int alpha_order, int dim, int degree, double a) {
  if (!(a > 0.0)) throw InputError("a must be positive");
  double c = 0.0;
  for (int n = 3; n <= degree; ++n) {
    for (const auto& beta : multi_indices_of_order(dim, n)) {
      c += factorial(beta) * std::pow(a, alpha_order - n);
    }
  }
  return c;
}

std::vector<std::vector<double>> sample_ball(std::span<const double> center, double radius, int count,
                                             std::uint64_t seed) {
  const std::size_t d = center.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) {
    std::vector<double> u(d);
    double n = 0.0;
    for (double& x : u) {
      x = normal(rng);
      n += x * x;
    }
    const double len = radius * std::pow(unif(rng), 1.0 / static_cast<double>(d)) / std::sqrt(n);
    for (std::size_t i = 0; i < d; ++i) u[i] = center[i] + len * u[i];
    out.push_back(std::move(u));
  }
  return out;
}

RemainderReport remainder_check(const DerivativeBank& bank, const QuadraticModel& model, double a,
                                int samples, std::uint64_t seed) {
  if (!(a > 0.0)) throw InputError("a must be positive");
  if (samples < 1) throw InputError("samples must be positive");
  const int d = bank.dimension();
  const int r = bank.degree();
  RemainderReport rep;
  rep.a = a;
  rep.samples = static_cast<std::size_t>(samples);
  const double r_center = bank.r_geq(3, model.center);
  const double r_base = bank.r_geq(3, model.base);
  // degree <= 2: V == V_j^2 and R^{>=3} == 0; sample a unit ball instead
  rep.radius = r_center > 0.0 ? a / r_center : a;
  const auto pts = sample_ball(model.base, rep.radius, samples, seed);

  for (int n = 1; n <= 2; ++n) {
    const double c = remainder_constant(n, d, r, a);
    for (const auto& alpha : multi_indices_of_order(d, n)) {
      const Polynomial model_deriv = model.polynomial.derivative(alpha);
      RemainderEntry e{alpha, c, 0.0};
      const double bound = c * std::pow(r_base, n);
      for (const auto& q : pts) {
        const double diff = std::abs(bank.derivative(alpha, q) - model_deriv(q));
        double ratio = 0.0;
        if (diff > 0.0) {
          ratio = bound > 0.0 ? diff / bound : std::numeric_limits<double>::infinity();
        }
        e.max_ratio = std::max(e.max_ratio, ratio);
      }
      rep.max_ratio = std::max(rep.max_ratio, e.max_ratio);
      rep.entries.push_back(std::move(e));
    }
  }
  rep.pass = rep.max_ratio <= 1.0;
  return rep;
}

ComparisonReport comparison_check(const DerivativeBank& bank, const QuadraticModel& model, double radius,
                                  int samples, std::uint64_t seed) {
  if (!(radius > 0.0)) throw InputError("radius must be positive");
  if (samples < 1) throw InputError("samples must be positive");
  ComparisonReport rep;
  rep.radius = radius;
  rep.samples = static_cast<std::size_t>(samples);
  rep.gradient_ratio_min = rep.hessian_ratio_min = std::numeric_limits<double>::infinity();
  const double model_hess = model.hessian.norm();
  for (const auto& q : sample_ball(model.base, radius, samples, seed)) {
    const double g = bank.gradient(q).norm();
    const double gm = model.model_gradient(q).norm();
    const double rg = gm > 0.0 ? g / gm : (g > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    const double h = bank.hessian(q).norm();
    const double rh = model_hess > 0.0 ? h / model_hess : (h > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    rep.gradient_ratio_min = std::min(rep.gradient_ratio_min, rg);
    rep.gradient_ratio_max = std::max(rep.gradient_ratio_max, rg);
    rep.hessian_ratio_min = std::min(rep.hessian_ratio_min, rh);
    rep.hessian_ratio_max = std::max(rep.hessian_ratio_max, rh);
  }
  rep.gradient_pass = rep.gradient_ratio_min >= 0.5 && rep.gradient_ratio_max <= 2.0;
  rep.hessian_pass = rep.hessian_ratio_min >= 0.5 && rep.hessian_ratio_max <= 2.0;
  return rep;
}

namespace {
nlohmann::json finite_or_string(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(v > 0 ? "inf" : "-inf");
}
}  // namespace

nlohmann::json to_json(const QuadraticModel& m) {
  std::vector<std::vector<double>> h(m.hessian.rows(), std::vector<double>(m.hessian.cols()));
  for (Eigen::Index i = 0; i < m.hessian.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.hessian.cols(); ++j) h[i][j] = m.hessian(i, j);
  }
  return {{"center", m.center},
          {"base", m.base},
          {"value", m.value},
          {"gradient", std::vector<double>(m.gradient.data(), m.gradient.data() + m.gradient.size())},
          {"hessian", h},
          {"polynomial", m.polynomial.to_json()},
          {"tr_plus", m.tr_plus},
          {"tr_minus", m.tr_minus},
          {"min_gradient", m.min_gradient},
          {"A", m.a_const},
          {"B", m.b_const},
          {"t_j", m.t_j},
          {"in_J_kappa", m.in_j_kappa},
          {"kappa", m.kappa}};
}

nlohmann::json to_json(const RemainderReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"alpha", e.alpha}, {"constant", e.constant}, {"max_ratio", finite_or_string(e.max_ratio)}});
  }
  return {{"a", r.a},
          {"radius", r.radius},
          {"samples", r.samples},
          {"entries", entries},
          {"max_ratio", finite_or_string(r.max_ratio)},
          {"pass", r.pass}};
}

nlohmann::json to_json(const ComparisonReport& r) {
  return {{"radius", r.radius},
          {"samples", r.samples},
          {"gradient_ratio", {finite_or_string(r.gradient_ratio_min), finite_or_string(r.gradient_ratio_max)}},
          {"hessian_ratio", {finite_or_string(r.hessian_ratio_min), finite_or_string(r.hessian_ratio_max)}},
          {"gradient_pass", r.gradient_pass},
          {"hessian_pass", r.hessian_pass}};
}

}  // namespace kfplab
