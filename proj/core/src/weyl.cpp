#include "kfplab/weyl.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "kfplab/errors.hpp"

namespace kfplab {

namespace {

using Rule = boost::math::quadrature::gauss<double, 20>;

double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

double bump_d1(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double w = 1.0 - s * s;
  return bump(s) * (-2.0 * s / (w * w));
}

double potential(double eps, double q1, double q2) {
  const double a = q1 * q1 - q2;
  return a * a + eps * q2 * q2;
}

// composite Gauss-Legendre over [a0, a1] x [b0, b1], `panels` per axis
template <class F>
double integrate(F&& f, double a0, double a1, double b0, double b1, int panels) {
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  std::vector<double> nodes_a, weights_a, nodes_b, weights_b;
  auto build = [&](double lo, double hi, std::vector<double>& nodes, std::vector<double>& weights) {
    const double step = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = lo + (p + 0.5) * step, half = 0.5 * step;
      for (std::size_t i = 0; i < x.size(); ++i) {
        nodes.push_back(mid - half * x[i]);
        weights.push_back(half * w[i]);
        nodes.push_back(mid + half * x[i]);
        weights.push_back(half * w[i]);
      }
    }
  };
  build(a0, a1, nodes_a, weights_a);
  build(b0, b1, nodes_b, weights_b);
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes_a.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < nodes_b.size(); ++j) row += weights_b[j] * f(nodes_a[i], nodes_b[j]);
    sum += weights_a[i] * row;
  }
  return sum;
}

void check_inputs(double epsilon, const WeylOptions& opts) {
  if (epsilon != -1.0) throw InputError("the Weyl construction needs epsilon = -1");
  if (opts.amplitude == 0.0) throw InputError("zero test function: Rayleigh quotient undefined");
  if (opts.initial_panels < 1 || opts.max_panels < opts.initial_panels) {
    throw InputError("invalid quadrature panel limits");
  }
}

double q1_half_width(int n) { return 8.0 / std::sqrt(static_cast<double>(n) * n - n); }

}  // namespace

std::pair<double, double> weyl_q2_support(int n) {
  const double nn = static_cast<double>(n);
  return {-nn * nn - nn, -nn * nn + nn};
}

WeylReport weyl_rayleigh(double epsilon, std::span<const int> n_list, const WeylOptions& opts) {
  check_inputs(epsilon, opts);
  if (n_list.empty()) throw InputError("n_list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 2) throw InputError("Weyl sequence needs n >= 2");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw InputError("n_list must be increasing");
  }
  WeylReport rep;
  rep.epsilon = epsilon;
  std::vector<PowerSample> samples;
  const double amp2 = opts.amplitude * opts.amplitude;
  for (int n : n_list) {
    const double nn = n;
    const auto [lo, hi] = weyl_q2_support(n);
    const double w = q1_half_width(n);
    // grad u + u grad V = A exp(-V) grad chi_n, and grad chi_n = (0, chi'(s)/n)
    auto energy = [&](double q1, double q2) {
      const double s = (q2 + nn * nn) / nn;
      const double g = bump_d1(s) / nn;
      return amp2 * g * g * std::exp(-2.0 * potential(epsilon, q1, q2));
    };
    auto mass = [&](double q1, double q2) {
      const double c = bump((q2 + nn * nn) / nn);
      return amp2 * c * c * std::exp(-2.0 * potential(epsilon, q1, q2));
    };
    WeylPoint pt;
    pt.n = n;
    double prev = 0.0;
    bool settled = false;
    for (int panels = opts.initial_panels; panels <= opts.max_panels; panels *= 2) {
      pt.energy = integrate(energy, -w, w, lo, hi, panels);
      pt.norm2 = integrate(mass, -w, w, lo, hi, panels);
      if (!(pt.norm2 > 0.0)) throw InputError("test function vanishes numerically");
      pt.quotient = pt.energy / pt.norm2;
      pt.trace.emplace_back(panels, pt.quotient);
      if (pt.trace.size() > 1 && std::abs(pt.quotient - prev) <= opts.tol * std::abs(pt.quotient)) {
        settled = true;
        break;
      }
      prev = pt.quotient;
    }
    if (!settled) {
      std::string msg = "quadrature for n=" + std::to_string(n) + " did not settle:";
      for (const auto& [p, q] : pt.trace) msg += " (" + std::to_string(p) + ", " + std::to_string(q) + ")";
      throw ConvergenceError(msg);
    }
    samples.emplace_back(nn, pt.quotient);
    rep.points.push_back(std::move(pt));
  }
  if (samples.size() >= 2) rep.fit = loglog_regression(samples);
  return rep;
}

double weyl_overlap(double epsilon, int n, int m, const WeylOptions& opts) {
  check_inputs(epsilon, opts);
  if (n < 2 || m < 2) throw InputError("Weyl sequence needs n >= 2");
  const auto [lo_n, hi_n] = weyl_q2_support(n);
  const auto [lo_m, hi_m] = weyl_q2_support(m);
  const double lo = std::max(lo_n, lo_m), hi = std::min(hi_n, hi_m);
  if (!(lo < hi)) return 0.0;
  const double w = std::max(q1_half_width(n), q1_half_width(m));
  const double a2 = opts.amplitude * opts.amplitude;
  auto f = [&](double q1, double q2) {
    const double cn = bump((q2 + double(n) * n) / n), cm = bump((q2 + double(m) * m) / m);
    return a2 * cn * cm * std::exp(-2.0 * potential(epsilon, q1, q2));
  };
  return integrate(f, -w, w, lo, hi, opts.max_panels / 8 > 0 ? opts.max_panels / 8 : 1);
}

nlohmann::json to_json(const WeylReport& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& [panels, q] : p.trace) trace.push_back({panels, q});
    pts.push_back({{"n", p.n}, {"quotient", p.quotient}, {"energy", p.energy}, {"norm2", p.norm2}, {"trace", trace}});
  }
  return {{"epsilon", r.epsilon}, {"points", pts}, {"fit", to_json(r.fit)}};
}

}  // namespace kfplab
