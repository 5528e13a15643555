#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "kfplab/discrete_operator.hpp"
#include "kfplab/partition.hpp"
#include "kfplab/power_law.hpp"

namespace kfplab {

/// A family of q-cutoffs chi_j with sum chi_j^2 = 1, evaluated pointwise.
/// Only the value and gradient fields of CutoffSample are used.
struct CutoffFamily {
  std::string label;
  std::function<std::vector<CutoffSample>(std::span<const double>)> evaluate;
};

CutoffFamily trivial_cutoff(int d);
/// d = 1: chi_left, chi_right normalized from two quintic steps that cross
/// over on [split - width, split + width].
CutoffFamily two_bump_cutoff(double split, double width);
/// psi_j of a partition; the partition box must contain the q-grid.
CutoffFamily partition_cutoff(const PartitionSpec& spec);

struct ImsReport {
  DiscreteGrid grid;
  std::string family;
  std::size_t cutoffs = 0;        // cutoffs nonzero somewhere on the grid
  int trials = 0;
  std::uint64_t seed = 0;
  double unity_defect = 0.0;      // max |sum chi^2 - 1| over the nodes
  double max_relative_defect = 0.0;
  std::vector<double> defects;    // |lhs - rhs| / lhs per test vector
  std::vector<double> lhs;        // ||K u||^2 per test vector
  // rhs - lhs = commutator part + cross part. The commutator part
  // sum_j ||[D_q, chi_j] p u||^2 - ||chi_j' p u||^2 does not involve V; the cross
  // part 2 <K u, sum_j chi_j [D_q, chi_j] p u> vanishes only in the continuum.
  // Both are stored relative to lhs.
  std::vector<double> commutator_parts;
  std::vector<double> cross_parts;
};

/// ||K u||^2 against sum_j ||K (chi_j u)||^2 - ||(p . d_q chi_j) u||^2 with the
/// same discrete K, for `trials` smooth random u.
ImsReport ims_identity_check(const DerivativeBank& bank, const DiscreteGrid& grid,
                             const CutoffFamily& family, int trials, std::uint64_t seed);

struct ImsRefinement {
  std::vector<ImsReport> runs;
  std::vector<double> ratios;  // defect(N_k) / defect(N_{k+1})
  PowerLawFit fit;             // defect against h
  double order = 0.0;          // fitted exponent of the defect in h
};

/// Repeats the check for each Nq in nq_list (same continuum test functions).
ImsRefinement ims_refinement(const DerivativeBank& bank, const DiscreteGrid& base,
                             const CutoffFamily& family, std::span<const int> nq_list, int trials,
                             std::uint64_t seed);

nlohmann::json to_json(const ImsReport& r);
nlohmann::json to_json(const ImsRefinement& r);

}  // namespace kfplab
