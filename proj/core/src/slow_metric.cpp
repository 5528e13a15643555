#include "kfplab/slow_metric.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kfplab/errors.hpp"

namespace kfplab {

namespace {

struct Pair {
  std::vector<double> q;
  std::vector<double> t;
  double rq = 0.0;       // R^{>=n}(q)
  double rq_prime = 0.0;  // R^{>=n-1}(q)
};

}  // namespace

SlowMetricReport slow_metric_probe(const DerivativeBank& bank, int n, const SlowMetricOptions& opts) {
  const int d = bank.dimension();
  const int r = bank.degree();
  if (n < 1 || n > r) {
    throw InputError("slow metric order n=" + std::to_string(n) + " outside 1.." + std::to_string(r) +
                     " (all derivatives of order >= n vanish)");
  }
  if (opts.trial_pairs < 1) throw InputError("trial_pairs must be positive");
  if (!(opts.radius_min > 0.0 && opts.radius_max > opts.radius_min)) {
    throw InputError("slow metric probe needs 0 < radius_min < radius_max");
  }
  if (!(opts.ladder_ratio > 1.0)) throw InputError("ladder ratio must exceed 1");

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double lo = std::log(opts.radius_min), hi = std::log(opts.radius_max);
  auto direction = [&] {
    std::vector<double> u(d);
    double s = 0;
    for (double& x : u) {
      x = normal(rng);
      s += x * x;
    }
    s = std::sqrt(s);
    for (double& x : u) x /= s;
    return u;
  };

  std::vector<Pair> pairs(opts.trial_pairs);
  for (auto& p : pairs) {
    const double rad = std::exp(lo + (hi - lo) * unif(rng));
    p.q = direction();
    for (double& x : p.q) x *= rad;
    p.t = direction();
    const double len = std::pow(unif(rng), 1.0 / d);
    for (double& x : p.t) x *= len;
    p.rq = bank.r_geq(n, p.q);
    if (n > 1) p.rq_prime = bank.r_geq(n - 1, p.q);
  }

  SlowMetricReport rep;
  rep.n = n;
  rep.trial_pairs = opts.trial_pairs;
  rep.seed = opts.seed;

  std::vector<double> qp(d);
  bool found = false, found_prime = n == 1;
  for (int k = 0;; ++k) {
    const double c = std::pow(opts.ladder_ratio, k);
    if (c > opts.ladder_max) break;
    double worst = 1.0, worst_prime = 1.0;
    for (const auto& p : pairs) {
      const double step = 1.0 / (c * p.rq);
      for (int i = 0; i < d; ++i) qp[i] = p.q[i] + step * p.t[i];
      const double rr = bank.r_geq(n, qp);
      worst = std::max({worst, p.rq / rr, rr / p.rq});
      if (!found_prime) {
        const double rp = bank.r_geq(n - 1, qp);
        worst_prime = std::max({worst_prime, p.rq_prime / rp, rp / p.rq_prime});
      }
    }
    if (!found && worst <= c) {
      found = true;
      rep.constant = c;
      rep.max_ratio = worst;
    }
    if (!found_prime && worst_prime <= c) {
      found_prime = true;
      rep.constant_prime = c;
    }
    if (found && found_prime) break;
  }
  if (!found) {
    throw ConvergenceError("slow metric ratio exceeds the ladder up to C=" + std::to_string(opts.ladder_max));
  }
  return rep;
}

nlohmann::json to_json(const SlowMetricReport& r) {
  nlohmann::json j = {{"n", r.n},
                      {"trial_pairs", r.trial_pairs},
                      {"seed", r.seed},
                      {"C", r.constant},
                      {"max_ratio", r.max_ratio}};
  j["C_prime"] = r.constant_prime ? nlohmann::json(*r.constant_prime) : nlohmann::json();
  return j;
}

}  // namespace kfplab
