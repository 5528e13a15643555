#include "kfplab/test_functions.hpp"

#include <cmath>
#include <random>

#include "kfplab/errors.hpp"

namespace kfplab {

namespace {

struct Bump {
  std::vector<double> center;
  double width = 1.0;
  double weight = 1.0;
  std::vector<double> modes;  // coefficients over the first hermite_modes^d p-indices
};

std::vector<Bump> draw(const DiscreteGrid& g, std::mt19937_64& rng, const SmoothTestOptions& o, bool with_p) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> width(o.width_min, o.width_max);
  std::normal_distribution<double> normal;
  std::vector<Bump> bumps(o.bumps);
  const int modes = std::min(o.hermite_modes, g.np);
  for (auto& b : bumps) {
    b.center.resize(g.d);
    for (double& c : b.center) c = o.center_fraction * g.lq * unif(rng);
    b.width = width(rng);
    b.weight = normal(rng);
    if (with_p) {
      int count = 1;
      for (int i = 0; i < g.d; ++i) count *= modes;
      b.modes.resize(count);
      for (double& m : b.modes) m = normal(rng);
    }
  }
  return bumps;
}

double gaussian(std::span<const double> q, std::span<const double> c, double w) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) r2 += (q[i] - c[i]) * (q[i] - c[i]);
  return std::exp(-r2 / (2.0 * w * w));
}

}  // namespace

std::vector<Eigen::VectorXd> smooth_phase_vectors(const DiscreteGrid& g, int count, std::uint64_t seed,
                                                  const SmoothTestOptions& o) {
  if (count < 0) throw InputError("test vector count must be nonnegative");
  std::mt19937_64 rng(seed);
  const int modes = std::min(o.hermite_modes, g.np);
  const std::size_t pn = g.p_size();
  std::vector<Eigen::VectorXd> out;
  for (int t = 0; t < count; ++t) {
    const auto bumps = draw(g, rng, o, true);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.phase_size()));
    for (std::size_t iq = 0; iq < g.q_size(); ++iq) {
      const auto q = g.q_point(iq);
      for (const auto& b : bumps) {
        const double gq = b.weight * gaussian(q, b.center, b.width);
        if (gq == 0.0) continue;
        for (std::size_t ip = 0; ip < pn; ++ip) {
          const auto n = g.p_index(ip);
          int flat = 0;
          bool inside = true;
          for (int i = 0; i < g.d; ++i) {
            inside = inside && n[i] < modes;
            flat = flat * modes + n[i];
          }
          if (inside) u[static_cast<Eigen::Index>(iq * pn + ip)] += gq * b.modes[flat];
        }
      }
    }
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<Eigen::VectorXd> smooth_q_vectors(const DiscreteGrid& g, int count, std::uint64_t seed,
                                              const SmoothTestOptions& o) {
  if (count < 0) throw InputError("test vector count must be nonnegative");
  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> out;
  for (int t = 0; t < count; ++t) {
    const auto bumps = draw(g, rng, o, false);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.q_size()));
    for (std::size_t iq = 0; iq < g.q_size(); ++iq) {
      const auto q = g.q_point(iq);
      for (const auto& b : bumps) u[static_cast<Eigen::Index>(iq)] += b.weight * gaussian(q, b.center, b.width);
    }
    out.push_back(std::move(u));
  }
  return out;
}

Eigen::VectorXd gaussian_hermite(const DiscreteGrid& g, std::span<const double> center, double width,
                                 std::span<const int> hermite) {
  if (static_cast<int>(center.size()) != g.d || static_cast<int>(hermite.size()) != g.d) {
    throw InputError("center and Hermite index must have length d");
  }
  std::size_t ip = 0;
  for (int i = 0; i < g.d; ++i) {
    if (hermite[i] < 0 || hermite[i] >= g.np) throw InputError("Hermite index outside the basis");
    ip = ip * static_cast<std::size_t>(g.np) + static_cast<std::size_t>(hermite[i]);
  }
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.phase_size()));
  for (std::size_t iq = 0; iq < g.q_size(); ++iq) {
    u[static_cast<Eigen::Index>(iq * g.p_size() + ip)] = gaussian(g.q_point(iq), center, width);
  }
  return u;
}

}  // namespace kfplab
