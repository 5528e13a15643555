#include "kfplab/partition.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kfplab/errors.hpp"
#include "kfplab/slow_metric.hpp"

namespace kfplab {

double Bump::value(double s) const {
  if (s <= beta) return 1.0;
  if (s >= 1.0) return 0.0;
  const double t = (s - beta) / (1.0 - beta);
  return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

double Bump::d1(double s) const {
  if (s <= beta || s >= 1.0) return 0.0;
  const double w = 1.0 - beta;
  const double t = (s - beta) / w;
  return -30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
}

double Bump::d2(double s) const {
  if (s <= beta || s >= 1.0) return 0.0;
  const double w = 1.0 - beta;
  const double t = (s - beta) / w;
  return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (w * w);
}

namespace {

constexpr long long kCellSpan = 1LL << 20;

// lexicographic walk over an integer grid, axis 0 slowest
template <class F>
void for_each_grid_point(const Box& box, const std::vector<long long>& counts, F&& f) {
  const int d = box.dimension();
  std::vector<long long> idx(d, 0);
  std::vector<double> q(d);
  while (true) {
    for (int i = 0; i < d; ++i) {
      q[i] = counts[i] == 1 ? box.lo[i]
                            : box.lo[i] + (box.hi[i] - box.lo[i]) * static_cast<double>(idx[i]) /
                                              static_cast<double>(counts[i] - 1);
    }
    f(std::span<const double>(q));
    int k = d - 1;
    while (k >= 0 && ++idx[k] == counts[k]) idx[k--] = 0;
    if (k < 0) break;
  }
}

double metric_max(const DerivativeBank& bank, const Box& box, int per_axis) {
  std::vector<long long> counts(box.dimension(), per_axis);
  double hi = 0.0;
  for_each_grid_point(box, counts, [&](std::span<const double> q) { hi = std::max(hi, bank.r_geq(3, q)); });
  return hi;
}

}  // namespace

PartitionSpec::PartitionSpec(const DerivativeBank& bank, Box box, const PartitionOptions& opts)
    : box_(std::move(box)) {
  const int d = bank.dimension();
  if (bank.degree() <= 2) throw InputError("degree <= 2 needs no localization");
  if (box_.dimension() != d || static_cast<int>(box_.hi.size()) != d) {
    throw InputError("box dimension does not match the potential");
  }
  if (d > 3) throw InputError("partitions are built for d <= 3");
  for (int i = 0; i < d; ++i) {
    if (!(box_.lo[i] < box_.hi[i])) throw InputError("empty box");
  }
  if (opts.grid_refine < 1) throw InputError("grid_refine must be >= 1");

  c_ = opts.slow_constant;
  if (c_ <= 0.0) {
    double corner = 0.0;
    for (int i = 0; i < d; ++i) {
      corner += std::max(box_.lo[i] * box_.lo[i], box_.hi[i] * box_.hi[i]);
    }
    SlowMetricOptions so;
    so.trial_pairs = opts.probe_pairs;
    so.seed = opts.seed;
    so.radius_max = std::max(1.0, std::sqrt(corner));
    c_ = slow_metric_probe(bank, 3, so).constant;
  }
  a_ = opts.a > 0.0 ? opts.a : 1.0 / (2.0 * c_);
  b_ = opts.b > 0.0 ? opts.b : a_ / 2.0;
  if (!(b_ < a_)) throw InputError("partition needs 0 < b < a");
  if (a_ >= 1.0 / c_) {
    throw InputError("a = " + std::to_string(a_) + " violates the slow-metric condition a < 1/C, C = " +
                     std::to_string(c_));
  }
  bump_.beta = b_ / a_;

  // the scan retries with a larger bound if a center exceeds this estimate
  double r_max = metric_max(bank, box_, d == 1 ? 4097 : d == 2 ? 129 : 33);

  for (int attempt = 0; attempt < 8; ++attempt) {
    // half the spacing coverage needs; coarser scans give visibly different greedy packings
    h_ = (a_ - b_) / (2.0 * r_max * std::sqrt(static_cast<double>(d))) / opts.grid_refine;
    std::vector<long long> counts(d);
    double total = 1.0;
    for (int i = 0; i < d; ++i) {
      counts[i] = static_cast<long long>(std::ceil((box_.hi[i] - box_.lo[i]) / h_)) + 1;
      total *= static_cast<double>(counts[i]);
    }
    if (total > static_cast<double>(opts.max_grid_points)) {
      throw BudgetError("partition scan grid needs " + std::to_string(static_cast<long long>(total)) +
                            " points, limit " + std::to_string(opts.max_grid_points),
                        static_cast<std::size_t>(total), opts.max_grid_points);
    }
    grid_points_ = static_cast<std::size_t>(total);
    cell_size_ = a_ / r_max;
    centers_.clear();
    r_.clear();
    cells_.clear();
    double seen_max = 0.0;
    for_each_grid_point(box_, counts, [&](std::span<const double> q) {
      if (covered(q)) return;
      centers_.insert(centers_.end(), q.begin(), q.end());
      r_.push_back(bank.r_geq(3, q));
      seen_max = std::max(seen_max, r_.back());
      insert(r_.size() - 1);
    });
    if (seen_max <= r_max) {
      observed_overlap_ = 0;
      for_each_grid_point(box_, counts, [&](std::span<const double> q) {
        observed_overlap_ = std::max(observed_overlap_, active(q).size());
      });
      return;
    }
    r_max = 1.25 * seen_max;
  }
  throw ConvergenceError("partition grid spacing did not settle");
}

std::span<const double> PartitionSpec::center(std::size_t j) const {
  const std::size_t d = static_cast<std::size_t>(dimension());
  return {centers_.data() + j * d, d};
}

double PartitionSpec::overlap_bound() const {
  return std::pow(4.0 * c_ * c_ * c_ + 1.0, dimension());
}

long long PartitionSpec::cell_key(const std::vector<long long>& c) const {
  long long key = 0;
  for (long long x : c) key = key * kCellSpan + (x + kCellSpan / 2);
  return key;
}

std::vector<long long> PartitionSpec::cell_of(std::span<const double> q) const {
  std::vector<long long> c(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    c[i] = static_cast<long long>(std::floor((q[i] - box_.lo[i]) / cell_size_));
  }
  return c;
}

void PartitionSpec::insert(std::size_t j) {
  const int d = dimension();
  const auto c = center(j);
  const double rad = support_radius(j);
  std::vector<double> lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = c[i] - rad;
    hi[i] = c[i] + rad;
  }
  const auto clo = cell_of(lo), chi = cell_of(hi);
  std::vector<long long> idx = clo;
  while (true) {
    cells_[cell_key(idx)].push_back(static_cast<std::uint32_t>(j));
    int k = d - 1;
    while (k >= 0 && ++idx[k] > chi[k]) {
      idx[k] = clo[k];
      --k;
    }
    if (k < 0) break;
  }
}

namespace {
double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}
}  // namespace

bool PartitionSpec::covered(std::span<const double> q) const {
  const auto it = cells_.find(cell_key(cell_of(q)));
  if (it == cells_.end()) return false;
  for (std::uint32_t j : it->second) {
    const double rin = inner_radius(j);
    if (dist2(q, center(j)) <= rin * rin) return true;
  }
  return false;
}

std::vector<std::size_t> PartitionSpec::active(std::span<const double> q) const {
  if (static_cast<int>(q.size()) != dimension()) throw InputError("point dimension mismatch");
  std::vector<std::size_t> out;
  const auto it = cells_.find(cell_key(cell_of(q)));
  if (it == cells_.end()) return out;
  for (std::uint32_t j : it->second) {
    const double rs = support_radius(j);
    if (dist2(q, center(j)) < rs * rs) out.push_back(j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double PartitionSpec::phi(std::size_t j, std::span<const double> q) const {
  return bump_.value(std::sqrt(dist2(q, center(j))) * r_[j] / a_);
}

std::vector<CutoffSample> PartitionSpec::evaluate(std::span<const double> q, bool with_hessian) const {
  const int d = dimension();
  const auto idx = active(q);
  const std::size_t m = idx.size();
  std::vector<double> phi(m);
  std::vector<Eigen::VectorXd> grad(m);
  std::vector<Eigen::MatrixXd> hess(m);
  double s = 0.0;
  Eigen::VectorXd grad_s = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd hess_s = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j = idx[k];
    const auto c = center(j);
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x[i] = q[i] - c[i];
    const double r = x.norm();
    const double scale = r_[j] / a_;
    const double sv = r * scale;
    phi[k] = bump_.value(sv);
    grad[k] = Eigen::VectorXd::Zero(d);
    hess[k] = Eigen::MatrixXd::Zero(d, d);
    if (sv > bump_.beta) {
      const double t1 = bump_.d1(sv), t2 = bump_.d2(sv);
      const Eigen::VectorXd u = x / r;
      grad[k] = t1 * scale * u;
      if (with_hessian) {
        hess[k] = t2 * scale * scale * u * u.transpose() +
                  t1 * scale / r * (Eigen::MatrixXd::Identity(d, d) - u * u.transpose());
      }
    }
    s += phi[k] * phi[k];
    grad_s += 2.0 * phi[k] * grad[k];
    if (with_hessian) hess_s += 2.0 * (grad[k] * grad[k].transpose() + phi[k] * hess[k]);
  }
  if (!(s > 0.0)) throw InputError("point lies outside the partition's covered region");

  const double f = 1.0 / std::sqrt(s);
  const Eigen::VectorXd grad_f = -0.5 * std::pow(s, -1.5) * grad_s;
  Eigen::MatrixXd hess_f;
  if (with_hessian) {
    hess_f = 0.75 * std::pow(s, -2.5) * grad_s * grad_s.transpose() - 0.5 * std::pow(s, -1.5) * hess_s;
  }
  std::vector<CutoffSample> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    out[k].index = idx[k];
    out[k].psi = phi[k] * f;
    out[k].gradient = grad[k] * f + phi[k] * grad_f;
    if (with_hessian) {
      out[k].hessian = hess[k] * f + grad[k] * grad_f.transpose() + grad_f * grad[k].transpose() +
                       phi[k] * hess_f;
    }
  }
  return out;
}

double PartitionSpec::sum_psi_squared(std::span<const double> q) const {
  double s = 0.0;
  for (const auto& c : evaluate(q, false)) s += c.psi * c.psi;
  return s;
}

nlohmann::json PartitionSpec::to_json(bool include_centers) const {
  nlohmann::json j = {
      {"dimension", dimension()},
      {"box", {{"lo", box_.lo}, {"hi", box_.hi}}},
      {"a", a_},
      {"b", b_},
      {"slow_constant", c_},
      {"overlap_bound", overlap_bound()},
      {"observed_overlap", observed_overlap_},
      {"grid_step", h_},
      {"grid_points", grid_points_},
      {"count", size()},
      {"theta", {{"kind", "quintic_smoothstep"}, {"knots", {0.0, bump_.beta, 1.0}},
                 {"formula", "1 - S((s-beta)/(1-beta)), S(t) = 10t^3 - 15t^4 + 6t^5"}}}};
  if (include_centers) {
    nlohmann::json centers = nlohmann::json::array();
    nlohmann::json radii = nlohmann::json::array();
    for (std::size_t k = 0; k < size(); ++k) {
      const auto c = center(k);
      centers.push_back(std::vector<double>(c.begin(), c.end()));
      radii.push_back(support_radius(k));
    }
    j["centers"] = std::move(centers);
    j["radii"] = std::move(radii);
  }
  return j;
}

PartitionDiagnostics partition_diagnostics(const PartitionSpec& spec, const DerivativeBank& bank,
                                           int samples, std::uint64_t seed) {
  if (samples < 1) throw InputError("samples must be positive");
  const int d = spec.dimension();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PartitionDiagnostics out;
  out.samples = static_cast<std::size_t>(samples);
  std::vector<double> q(d);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < d; ++i) q[i] = spec.box().lo[i] + (spec.box().hi[i] - spec.box().lo[i]) * unif(rng);
    const auto cut = spec.evaluate(q, false);
    double sum = 0.0, grad2 = 0.0;
    for (const auto& c : cut) {
      sum += c.psi * c.psi;
      grad2 += c.gradient.squaredNorm();
    }
    const double r = bank.r_geq(3, q);
    out.max_unity_defect = std::max(out.max_unity_defect, std::abs(sum - 1.0));
    out.max_active = std::max(out.max_active, cut.size());
    out.gradient_constant = std::max(out.gradient_constant, grad2 / (r * r));
  }
  return out;
}

nlohmann::json to_json(const PartitionDiagnostics& d) {
  return {{"samples", d.samples},
          {"max_unity_defect", d.max_unity_defect},
          {"max_active", d.max_active},
          {"gradient_constant", d.gradient_constant}};
}

}  // namespace kfplab
