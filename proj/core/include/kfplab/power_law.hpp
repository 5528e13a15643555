#pragma once

#include <span>
#include <utility>

#include "json.hpp"

namespace kfplab {

/// f(rho) ~ amplitude * rho^exponent, fitted by ordinary least squares on
/// (log rho, log f).
struct PowerLawFit {
  double amplitude = 0.0;
  double exponent = 0.0;
  double residual = 0.0;  // RMS of the log-log residuals
  double rho_min = 0.0;
  double rho_max = 0.0;
  std::size_t samples = 0;
};

using PowerSample = std::pair<double, double>;  // (rho, f)

/// Requires >= 5 samples with strictly increasing positive rho and positive f.
PowerLawFit power_law_fit(std::span<const PowerSample> samples);

/// Same regression without the sample-count floor (>= 2 samples). Used where
/// the caller controls the sampling, e.g. a short ladder of n values.
PowerLawFit loglog_regression(std::span<const PowerSample> samples);

nlohmann::json to_json(const PowerLawFit& fit);

}  // namespace kfplab
