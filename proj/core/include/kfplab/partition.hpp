#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "kfplab/point_analysis.hpp"

namespace kfplab {

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  int dimension() const noexcept { return static_cast<int>(lo.size()); }
};

/// theta(s): 1 on [0, beta], 0 on [1, inf), quintic smoothstep in between (C^2).
struct Bump {
  double beta = 0.5;  // b / a
  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const;
};

struct PartitionOptions {
  double a = 0.0;              // 0 selects a = 1/(2C)
  double b = 0.0;              // 0 selects b = a/2
  double slow_constant = 0.0;  // 0 runs slow_metric_probe(n = 3)
  int grid_refine = 1;         // scan grid spacing is divided by this factor
  int probe_pairs = 2000;
  std::uint64_t seed = 1;
  std::size_t max_grid_points = 60'000'000;
};

struct CutoffSample {
  std::size_t index = 0;
  double psi = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Ball covering of a box by slow-metric balls B(q_j, a/R^{>=3}(q_j)) with
/// cutoffs phi_j = theta(|q - q_j| R^{>=3}(q_j) / a) and the normalized
/// psi_j = phi_j / sqrt(sum_k phi_k^2).
///
/// Centers come from a greedy lexicographic scan of a grid with spacing
/// h = (a - b)/(2 sqrt(d) max R^{>=3}) / grid_refine. Every grid point lies in
/// some inner ball b/R(q_j), and h sqrt(d)/2 < (a - b)/max R^{>=3}, so every box
/// point lies strictly inside some support ball and sum phi^2 > 0 on the box.
class PartitionSpec {
 public:
  PartitionSpec(const DerivativeBank& bank, Box box, const PartitionOptions& opts = {});

  int dimension() const noexcept { return box_.dimension(); }
  const Box& box() const noexcept { return box_; }
  std::size_t size() const noexcept { return r_.size(); }
  std::span<const double> center(std::size_t j) const;
  double support_radius(std::size_t j) const { return a_ / r_[j]; }
  double inner_radius(std::size_t j) const { return b_ / r_[j]; }
  double metric(std::size_t j) const { return r_[j]; }  // R^{>=3}(q_j)
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  const Bump& bump() const noexcept { return bump_; }
  double slow_constant() const noexcept { return c_; }
  double grid_step() const noexcept { return h_; }
  std::size_t grid_points() const noexcept { return grid_points_; }

  /// (4 C^3 + 1)^d
  double overlap_bound() const;
  /// Largest number of overlapping supports seen at any scan grid point.
  std::size_t observed_overlap() const noexcept { return observed_overlap_; }

  double phi(std::size_t j, std::span<const double> q) const;
  /// Indices whose support contains q (phi_j(q) > 0).
  std::vector<std::size_t> active(std::span<const double> q) const;
  std::vector<CutoffSample> evaluate(std::span<const double> q, bool with_hessian = true) const;
  double sum_psi_squared(std::span<const double> q) const;

  nlohmann::json to_json(bool include_centers = true) const;

 private:
  long long cell_key(const std::vector<long long>& c) const;
  std::vector<long long> cell_of(std::span<const double> q) const;
  void insert(std::size_t j);
  bool covered(std::span<const double> q) const;

  Box box_;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0, h_ = 0.0;
  Bump bump_;
  std::vector<double> centers_;  // flat, d per center
  std::vector<double> r_;
  std::size_t grid_points_ = 0;
  std::size_t observed_overlap_ = 0;
  double cell_size_ = 0.0;
  std::unordered_map<long long, std::vector<std::uint32_t>> cells_;
};

struct PartitionDiagnostics {
  std::size_t samples = 0;
  double max_unity_defect = 0.0;     // max |sum psi^2 - 1|
  std::size_t max_active = 0;        // max number of nonzero cutoffs
  double gradient_constant = 0.0;    // max sum |grad psi_j|^2 / R^{>=3}(q)^2
};

/// Uniform samples of the box, fixed seed.
PartitionDiagnostics partition_diagnostics(const PartitionSpec& spec, const DerivativeBank& bank,
                                           int samples, std::uint64_t seed);

nlohmann::json to_json(const PartitionDiagnostics& d);

}  // namespace kfplab
