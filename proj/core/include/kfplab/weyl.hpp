#pragma once

#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kfplab/power_law.hpp"

namespace kfplab {

/// Test functions u_n(q) = A chi((q2 + n^2)/n) exp(-V(q)) for
/// V = (q1^2 - q2)^2 + eps q2^2 with chi(s) = exp(-1/(1 - s^2)) on |s| < 1.
/// For eps = -1 the Rayleigh quotient of the Witten Laplacian,
/// ||(d_q + d_q V) u_n||^2 / ||u_n||^2, decays like n^{-2}.
struct WeylOptions {
  double amplitude = 1.0;
  int initial_panels = 2;  // composite 20-point Gauss-Legendre panels per axis
  int max_panels = 512;
  double tol = 1e-10;      // relative change between panel doublings
};

struct WeylPoint {
  int n = 0;
  double quotient = 0.0;
  double energy = 0.0;  // ||(d_q + d_q V) u_n||^2
  double norm2 = 0.0;   // ||u_n||^2
  std::vector<std::pair<int, double>> trace;  // (panels per axis, quotient)
};

struct WeylReport {
  double epsilon = -1.0;
  std::vector<WeylPoint> points;
  PowerLawFit fit;  // quotient against n
};

/// Support box of u_n: q2 in [-n^2 - n, -n^2 + n], |q1| <= 8 / sqrt(n^2 - n).
std::pair<double, double> weyl_q2_support(int n);

WeylReport weyl_rayleigh(double epsilon, std::span<const int> n_list, const WeylOptions& opts = {});

/// <u_n, u_m> by quadrature over the intersection of the supports (0 when empty).
double weyl_overlap(double epsilon, int n, int m, const WeylOptions& opts = {});

nlohmann::json to_json(const WeylReport& r);

}  // namespace kfplab
