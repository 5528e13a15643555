#pragma once

#include <cstdint>
#include <optional>

#include "json.hpp"
#include "kfplab/point_analysis.hpp"

namespace kfplab {

struct SlowMetricOptions {
  int trial_pairs = 2000;
  std::uint64_t seed = 1;
  double radius_min = 1e-3;  // base points |q| drawn log-uniformly in [radius_min, radius_max]
  double radius_max = 100.0;
  double ladder_ratio = 1.05;
  double ladder_max = 1e4;
};

struct SlowMetricReport {
  int n = 0;
  int trial_pairs = 0;
  std::uint64_t seed = 0;
  double constant = 0.0;        // smallest ladder C with max ratio <= C
  double max_ratio = 0.0;       // observed max ratio at that C
  std::optional<double> constant_prime;  // same test for R^{>=n-1} on R^{>=n} balls
};

/// Empirical slowness constant of the metric R^{>=n}(q)^2 |dq|^2.
///
/// For pairs with R^{>=n}(q) |q - q'| <= 1/C the ratio
/// max(R(q)/R(q'), R(q')/R(q)) is compared with C on the ladder
/// C_k = ladder_ratio^k; the same displacement samples t (|t| <= 1,
/// q' = q + t / (C R(q))) are reused for every rung. n = 1 skips the primed
/// variant.
SlowMetricReport slow_metric_probe(const DerivativeBank& bank, int n,
                                   const SlowMetricOptions& opts = {});

nlohmann::json to_json(const SlowMetricReport& r);

}  // namespace kfplab
