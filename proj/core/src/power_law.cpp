#include "kfplab/power_law.hpp"

#include <cmath>
#include <string>

#include "kfplab/errors.hpp"

namespace kfplab {

PowerLawFit loglog_regression(std::span<const PowerSample> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw InputError("log-log regression needs at least 2 samples");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [rho, f] = samples[i];
    if (!(rho > 0.0) || !(f > 0.0) || !std::isfinite(rho) || !std::isfinite(f)) {
      throw InputError("power-law samples need positive finite rho and f");
    }
    if (i > 0 && !(rho > samples[i - 1].first)) {
      throw InputError("power-law samples need strictly increasing rho");
    }
    sx += std::log(rho);
    sy += std::log(f);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [rho, f] : samples) {
    const double dx = std::log(rho) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(f) - my);
  }
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.amplitude = std::exp(intercept);
  double ss = 0;
  for (const auto& [rho, f] : samples) {
    const double e = std::log(f) - (intercept + fit.exponent * std::log(rho));
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  fit.rho_min = samples.front().first;
  fit.rho_max = samples.back().first;
  fit.samples = n;
  return fit;
}

PowerLawFit power_law_fit(std::span<const PowerSample> samples) {
  if (samples.size() < 5) {
    throw InputError("power_law_fit needs at least 5 samples, got " + std::to_string(samples.size()));
  }
  return loglog_regression(samples);
}

nlohmann::json to_json(const PowerLawFit& fit) {
  return {{"amplitude", fit.amplitude}, {"exponent", fit.exponent}, {"residual", fit.residual},
          {"rho_min", fit.rho_min},     {"rho_max", fit.rho_max},   {"samples", fit.samples}};
}

}  // namespace kfplab
