#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "kfplab/point_analysis.hpp"
#include "kfplab/power_law.hpp"

namespace kfplab {

using Point = std::vector<double>;

/// One evaluation of the Sigma(kappa) test at a point.
struct SigmaQuery {
  double kappa = 0.0;
  Point point;
  bool member = false;  // lhs >= rhs (ties are members)
  double lhs = 0.0;     // |grad V|^{4/3}
  double rhs = 0.0;     // kappa (|Hess V|_F + R^{>=3}^4 + 1)
};

SigmaQuery sigma_membership(const DerivativeBank& bank, double kappa, std::span<const double> q);
SigmaQuery sigma_membership(const Polynomial& poly, double kappa, std::span<const double> q);

/// Deterministic probe directions on the unit sphere: +-1 for d = 1, uniform
/// angles 2 pi k / count for d = 2, a Fibonacci lattice for d = 3 and a
/// fixed-seed Gaussian sample beyond that.
std::vector<Point> probe_directions(int dim, int count);

enum class ComplementVerdict { Bounded, Unbounded, Inconclusive };
std::string to_string(ComplementVerdict v);

/// Complement points found on the sphere |q| = radius.
struct ShellProbe {
  double radius = 0.0;
  bool complement_found = false;
  double min_margin = 0.0;  // min of lhs/rhs - 1 over the refined samples
  std::vector<Point> complement_points;
};

struct ShellOptions {
  int directions = 360;
  int arc_samples = 5;  // extra points sampled inside each complement arc (d = 2)
};

/// Scans the sphere of the given radius for points outside Sigma(kappa).
/// Coarse direction samples are refined around every discrete local minimum
/// of the margin lhs/rhs - 1, so thin complement branches (axes, curves) that
/// cross the sphere between samples are still detected.
ShellProbe probe_shell(const DerivativeBank& bank, double kappa, double radius,
                       const ShellOptions& opts = {});

struct ScanOptions {
  int shells = 8;                  // verdict shells, geometric in [r_min, r_max]
  double shell_min_factor = 0.5;   // r_min = factor * box_radius
  double shell_max_factor = 4.0;   // r_max = factor * box_radius
  int arc_samples = 5;
};

struct ComplementScan {
  double kappa = 0.0;
  double box_radius = 0.0;
  int grid_per_axis = 0;
  int radial_probes = 0;
  std::vector<Point> grid_complement;  // grid points outside Sigma(kappa)
  std::size_t grid_points = 0;
  std::vector<ShellProbe> shells;
  ComplementVerdict verdict = ComplementVerdict::Inconclusive;
  double probe_radius_min = 0.0;
  double probe_radius_max = 0.0;
};

/// Grid points of [-R, R]^d outside Sigma(kappa) plus a boundedness probe.
///
/// The verdict is Bounded when no shell in [R/2, 4R] meets the complement,
/// Unbounded when every shell does, and Inconclusive otherwise. It is a probe
/// at the recorded radii, not a proof. grid_per_axis = 0 selects ray-only
/// mode (any d); grid mode needs d <= 3 and grid_per_axis >= 16.
ComplementScan scan_complement(const DerivativeBank& bank, double kappa, double box_radius,
                               int grid_per_axis, int radial_probes, const ScanOptions& opts = {});

/// 2-d membership grid for contour export, row-major (q2 outer, q1 inner).
struct ContourCell {
  double q1 = 0.0;
  double q2 = 0.0;
  bool member = false;
  double lhs = 0.0;
  double rhs = 0.0;
};
std::vector<ContourCell> membership_grid(const DerivativeBank& bank, double kappa,
                                         double box_radius, int grid_per_axis);

struct AssumptionScanParams {
  double box_radius = 2.5e8;
  int grid_per_axis = 33;
  int radial_probes = 360;
  int verdict_shells = 8;
  double fit_min_radius = 1e5;
  double fit_max_radius = 1e9;
  int fit_shells = 17;
};

struct Condition14 {
  bool pass = true;
  double worst_ratio = 0.0;  // max Tr+/Tr- over checked points
  std::size_t points_checked = 0;
  std::optional<Point> worst_point;
};

struct Condition15 {
  bool pass = true;
  bool vacuous = false;
  std::optional<PowerLawFit> fit;
  double inner_decade_max = 0.0;
  double outer_decade_max = 0.0;
  std::vector<PowerSample> samples;  // (radius, max ratio on that shell)
  std::string note;
};

struct AssumptionReport {
  double kappa = 0.0;
  double c1 = 0.0;
  Condition14 condition_1_4;
  Condition15 condition_1_5;
  bool complement_bounded = false;
  ComplementVerdict verdict = ComplementVerdict::Inconclusive;
  double probe_radius_min = 0.0;
  double probe_radius_max = 0.0;
  std::size_t samples_used = 0;

  bool pass() const noexcept { return condition_1_4.pass && condition_1_5.pass; }
};

/// Empirical check of the two growth conditions on R^d \ Sigma(kappa):
///   Tr-(q) >= Tr+(q)/c1 at complement samples with |q| >= c1, and
///   R^{>=3}(q)^4 / |Hess V(q)|_F -> 0 along the complement, judged by a
///   power-law exponent < -0.05 plus halving between the inner and outer
///   decade of the fitted radius range.
AssumptionReport check_assumption(const DerivativeBank& bank, double kappa, double c1,
                                  const AssumptionScanParams& params = {});

struct CoercivityReport {
  double delta = 0.0;
  std::vector<double> radii;
  std::vector<double> min_f;  // min over directions of f_delta at each radius
  bool grows = false;         // strictly larger at the last radius, nondecreasing tail
  bool nondecreasing_tail = false;
  std::vector<std::pair<double, std::optional<double>>> eta;  // threshold A -> radius
};

/// f_delta(q) = |grad V|^{4(1-delta)/3} + |Hess V|_F^{1-delta} along rays.
double coercivity_function(const DerivativeBank& bank, double delta, std::span<const double> q);

CoercivityReport coercivity_witness(const DerivativeBank& bank, double delta, int directions,
                                    std::span<const double> radii,
                                    std::span<const double> thresholds = {});

nlohmann::json to_json(const SigmaQuery& s);
nlohmann::json to_json(const ComplementScan& s);
nlohmann::json to_json(const AssumptionReport& r);
nlohmann::json to_json(const CoercivityReport& r);

}  // namespace kfplab
