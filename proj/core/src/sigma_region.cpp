#include "kfplab/sigma_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kfplab/errors.hpp"

namespace kfplab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Evaluator {
  const DerivativeBank& bank;
  double kappa;

  SigmaSides sides(std::span<const double> q) const {
    const double g = bank.gradient(q).norm();
    const double h = bank.hessian(q).norm();
    const double r3 = bank.r_geq(3, q);
    return sigma_sides(kappa, g, h, r3);
  }
  double margin(std::span<const double> q) const {
    const auto s = sides(q);
    return s.lhs / s.rhs - 1.0;
  }
};

Point on_circle(double radius, double theta) {
  return {radius * std::cos(theta), radius * std::sin(theta)};
}

double norm(const Point& p) {
  double s = 0;
  for (double x : p) s += x * x;
  return std::sqrt(s);
}

// Golden-section minimization of f on [a, b].
template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * (1.0 + std::abs(a)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

struct Arc {
  double lo, hi;  // unwrapped angles, lo <= hi
  bool contains(double t) const {
    for (int k = -1; k <= 1; ++k) {
      const double s = t + k * kTwoPi;
      if (s >= lo && s <= hi) return true;
    }
    return false;
  }
};

ShellProbe probe_circle(const Evaluator& ev, double radius, const ShellOptions& opts) {
  ShellProbe out;
  out.radius = radius;
  const int m = opts.directions;
  const double step = kTwoPi / m;
  auto f = [&](double t) { return ev.margin(on_circle(radius, t)); };
  std::vector<double> vals(m);
  for (int k = 0; k < m; ++k) vals[k] = f(step * k);
  out.min_margin = *std::min_element(vals.begin(), vals.end());

  std::vector<Arc> arcs;
  for (int k = 0; k < m; ++k) {
    const double prev = vals[(k + m - 1) % m];
    const double next = vals[(k + 1) % m];
    if (vals[k] > prev || vals[k] > next) continue;
    const double theta_k = step * k;
    bool seen = false;
    for (const auto& a : arcs) seen = seen || a.contains(theta_k);
    if (seen) continue;

    auto [t_star, m_star] = golden_min(f, theta_k - step, theta_k + step);
    if (vals[k] < m_star) {
      t_star = theta_k;
      m_star = vals[k];
    }
    out.min_margin = std::min(out.min_margin, m_star);
    if (!(m_star < 0.0)) continue;

    // grow the arc outward until the margin turns nonnegative, then bisect
    auto edge = [&](double dir) {
      double inside = t_star, outside = t_star;
      bool closed = false;
      for (int s = 1; s <= m; ++s) {
        const double t = t_star + dir * s * step;
        if (f(t) >= 0.0) {
          outside = t;
          closed = true;
          break;
        }
        inside = t;
      }
      if (!closed) return inside;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (inside + outside);
        (f(mid) < 0.0 ? inside : outside) = mid;
      }
      return inside;
    };
    const double lo = edge(-1.0);
    const double hi = edge(+1.0);
    arcs.push_back({lo, hi});

    out.complement_points.push_back(on_circle(radius, t_star));
    for (int s = 0; s < opts.arc_samples; ++s) {
      const double t = opts.arc_samples == 1 ? 0.5 * (lo + hi)
                                             : lo + (hi - lo) * s / (opts.arc_samples - 1);
      if (f(t) < 0.0) out.complement_points.push_back(on_circle(radius, t));
    }
  }
  out.complement_found = !out.complement_points.empty();
  return out;
}

Point scaled(const Point& u, double r) {
  Point p(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) p[i] = r * u[i];
  return p;
}

void normalize(Point& u) {
  const double n = norm(u);
  for (double& x : u) x /= n;
}

// tangent basis at u by Gram-Schmidt on the coordinate axes
std::vector<Point> tangent_basis(const Point& u) {
  const std::size_t d = u.size();
  std::vector<Point> basis;
  for (std::size_t i = 0; i < d && basis.size() + 1 < d; ++i) {
    Point e(d, 0.0);
    e[i] = 1.0;
    auto project_out = [&](const Point& v) {
      double dot = 0;
      for (std::size_t k = 0; k < d; ++k) dot += e[k] * v[k];
      for (std::size_t k = 0; k < d; ++k) e[k] -= dot * v[k];
    };
    project_out(u);
    for (const auto& b : basis) project_out(b);
    if (norm(e) < 1e-8) continue;
    normalize(e);
    basis.push_back(e);
  }
  return basis;
}

ShellProbe probe_sphere(const Evaluator& ev, double radius, const ShellOptions& opts, int dim) {
  ShellProbe out;
  out.radius = radius;
  const auto dirs = probe_directions(dim, opts.directions);
  const std::size_t m = dirs.size();
  std::vector<double> vals(m);
  for (std::size_t k = 0; k < m; ++k) vals[k] = ev.margin(scaled(dirs[k], radius));
  out.min_margin = *std::min_element(vals.begin(), vals.end());
  if (dim == 1) {
    for (std::size_t k = 0; k < m; ++k) {
      if (vals[k] < 0.0) out.complement_points.push_back(scaled(dirs[k], radius));
    }
    out.complement_found = !out.complement_points.empty();
    return out;
  }

  // local minima with respect to the nearest directions
  const std::size_t neighbours = std::min<std::size_t>(8, m - 1);
  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == k) continue;
      double dot = 0;
      for (int i = 0; i < dim; ++i) dot += dirs[k][i] * dirs[j][i];
      near.emplace_back(-dot, j);
    }
    std::partial_sort(near.begin(), near.begin() + neighbours, near.end());
    bool is_min = true;
    for (std::size_t n = 0; n < neighbours && is_min; ++n) is_min = vals[k] <= vals[near[n].second];
    if (is_min) candidates.push_back(k);
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  if (candidates.size() > 20) candidates.resize(20);

  const double spacing = std::sqrt(4.0 * std::numbers::pi / static_cast<double>(m));
  for (std::size_t k : candidates) {
    Point u = dirs[k];
    double best = vals[k];
    double s = spacing;
    while (s > 1e-12) {
      bool improved = false;
      for (const auto& t : tangent_basis(u)) {
        for (double sign : {1.0, -1.0}) {
          Point v = u;
          for (int i = 0; i < dim; ++i) v[i] += sign * s * t[i];
          normalize(v);
          const double mv = ev.margin(scaled(v, radius));
          if (mv < best) {
            best = mv;
            u = v;
            improved = true;
          }
        }
      }
      if (!improved) s *= 0.5;
    }
    out.min_margin = std::min(out.min_margin, best);
    if (best < 0.0) out.complement_points.push_back(scaled(u, radius));
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (vals[k] < 0.0) out.complement_points.push_back(scaled(dirs[k], radius));
  }
  out.complement_found = !out.complement_points.empty();
  return out;
}

std::vector<double> geometric(double lo, double hi, int count) {
  std::vector<double> r;
  if (count == 1) return {lo};
  for (int k = 0; k < count; ++k) r.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
  return r;
}

void check_kappa(double kappa) {
  if (!(kappa > 0.0)) throw InputError("kappa must be positive");
}

}  // namespace

SigmaQuery sigma_membership(const DerivativeBank& bank, double kappa, std::span<const double> q) {
  check_kappa(kappa);
  const auto s = Evaluator{bank, kappa}.sides(q);
  return {kappa, Point(q.begin(), q.end()), s.member(), s.lhs, s.rhs};
}

SigmaQuery sigma_membership(const Polynomial& poly, double kappa, std::span<const double> q) {
  return sigma_membership(DerivativeBank(poly), kappa, q);
}

std::vector<Point> probe_directions(int dim, int count) {
  if (dim < 1) throw InputError("dimension must be positive");
  if (count < 1) throw InputError("need at least one probe direction");
  std::vector<Point> dirs;
  if (dim == 1) return {{1.0}, {-1.0}};
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double t = kTwoPi * k / count;
      dirs.push_back({std::cos(t), std::sin(t)});
    }
    return dirs;
  }
  if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double rr = std::sqrt(1.0 - z * z);
      const double phi = golden * k;
      dirs.push_back({rr * std::cos(phi), rr * std::sin(phi), z});
    }
    return dirs;
  }
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> normal;
  for (int k = 0; k < count; ++k) {
    Point u(dim);
    for (double& x : u) x = normal(rng);
    normalize(u);
    dirs.push_back(std::move(u));
  }
  return dirs;
}

std::string to_string(ComplementVerdict v) {
  switch (v) {
    case ComplementVerdict::Bounded: return "bounded";
    case ComplementVerdict::Unbounded: return "unbounded";
    case ComplementVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

ShellProbe probe_shell(const DerivativeBank& bank, double kappa, double radius,
                       const ShellOptions& opts) {
  check_kappa(kappa);
  if (!(radius > 0.0)) throw InputError("shell radius must be positive");
  if (opts.directions < 4) throw InputError("need at least 4 probe directions");
  const Evaluator ev{bank, kappa};
  if (bank.dimension() == 2) return probe_circle(ev, radius, opts);
  return probe_sphere(ev, radius, opts, bank.dimension());
}

ComplementScan scan_complement(const DerivativeBank& bank, double kappa, double box_radius,
                               int grid_per_axis, int radial_probes, const ScanOptions& opts) {
  check_kappa(kappa);
  if (!(box_radius > 0.0)) throw InputError("box radius must be positive");
  if (opts.shells < 1) throw InputError("need at least one probe shell");
  const int d = bank.dimension();
  if (grid_per_axis != 0) {
    if (d > 3) throw InputError("grid scanning supports d <= 3; use ray mode (grid_per_axis = 0)");
    if (grid_per_axis < 16) throw InputError("grid_per_axis must be >= 16");
  }
  ComplementScan scan;
  scan.kappa = kappa;
  scan.box_radius = box_radius;
  scan.grid_per_axis = grid_per_axis;
  scan.radial_probes = radial_probes;

  const Evaluator ev{bank, kappa};
  if (grid_per_axis > 0) {
    std::vector<double> axis(grid_per_axis);
    for (int i = 0; i < grid_per_axis; ++i) {
      axis[i] = -box_radius + 2.0 * box_radius * i / (grid_per_axis - 1);
    }
    std::vector<int> idx(d, 0);
    Point q(d);
    while (true) {
      for (int i = 0; i < d; ++i) q[i] = axis[idx[i]];
      ++scan.grid_points;
      const auto s = ev.sides(q);
      if (!s.member()) scan.grid_complement.push_back(q);
      int k = d - 1;
      while (k >= 0 && ++idx[k] == grid_per_axis) idx[k--] = 0;
      if (k < 0) break;
    }
  }

  scan.probe_radius_min = opts.shell_min_factor * box_radius;
  scan.probe_radius_max = opts.shell_max_factor * box_radius;
  const ShellOptions shell_opts{radial_probes, opts.arc_samples};
  std::size_t hits = 0;
  for (double r : geometric(scan.probe_radius_min, scan.probe_radius_max, opts.shells)) {
    scan.shells.push_back(probe_shell(bank, kappa, r, shell_opts));
    hits += scan.shells.back().complement_found ? 1 : 0;
  }
  if (hits == 0) scan.verdict = ComplementVerdict::Bounded;
  else if (hits == scan.shells.size()) scan.verdict = ComplementVerdict::Unbounded;
  else scan.verdict = ComplementVerdict::Inconclusive;
  return scan;
}

std::vector<ContourCell> membership_grid(const DerivativeBank& bank, double kappa,
                                         double box_radius, int grid_per_axis) {
  check_kappa(kappa);
  if (bank.dimension() != 2) throw InputError("contour grids need a 2-d potential");
  if (grid_per_axis < 2) throw InputError("contour grid needs at least 2 points per axis");
  if (!(box_radius > 0.0)) throw InputError("box radius must be positive");
  const Evaluator ev{bank, kappa};
  std::vector<ContourCell> cells;
  cells.reserve(static_cast<std::size_t>(grid_per_axis) * grid_per_axis);
  for (int j = 0; j < grid_per_axis; ++j) {
    const double q2 = -box_radius + 2.0 * box_radius * j / (grid_per_axis - 1);
    for (int i = 0; i < grid_per_axis; ++i) {
      const double q1 = -box_radius + 2.0 * box_radius * i / (grid_per_axis - 1);
      const Point q{q1, q2};
      const auto s = ev.sides(q);
      cells.push_back({q1, q2, s.member(), s.lhs, s.rhs});
    }
  }
  return cells;
}

AssumptionReport check_assumption(const DerivativeBank& bank, double kappa, double c1,
                                  const AssumptionScanParams& p) {
  if (!(kappa >= 1.0)) throw InputError("check_assumption needs kappa >= 1");
  if (!(c1 >= 1.0)) throw InputError("check_assumption needs c1 >= 1");
  if (!(p.fit_min_radius > 0.0) || !(p.fit_max_radius > p.fit_min_radius)) {
    throw InputError("fit radii must satisfy 0 < fit_min_radius < fit_max_radius");
  }
  AssumptionReport rep;
  rep.kappa = kappa;
  rep.c1 = c1;

  ScanOptions so;
  so.shells = p.verdict_shells;
  const int grid = bank.dimension() <= 3 ? p.grid_per_axis : 0;
  const auto scan = scan_complement(bank, kappa, p.box_radius, grid, p.radial_probes, so);
  rep.verdict = scan.verdict;
  rep.probe_radius_min = scan.probe_radius_min;
  rep.probe_radius_max = scan.probe_radius_max;

  const ShellOptions shell_opts{p.radial_probes, so.arc_samples};
  std::vector<ShellProbe> fit_shells;
  for (double r : geometric(p.fit_min_radius, p.fit_max_radius, p.fit_shells)) {
    fit_shells.push_back(probe_shell(bank, kappa, r, shell_opts));
  }

  std::vector<Point> all = scan.grid_complement;
  for (const auto& s : scan.shells) all.insert(all.end(), s.complement_points.begin(), s.complement_points.end());
  for (const auto& s : fit_shells) all.insert(all.end(), s.complement_points.begin(), s.complement_points.end());
  rep.samples_used = all.size();

  rep.complement_bounded = all.empty() || scan.verdict == ComplementVerdict::Bounded;

  // condition (1.4)
  for (const auto& q : all) {
    if (norm(q) < c1) continue;
    const auto split = hessian_trace_split(bank.hessian(q));
    ++rep.condition_1_4.points_checked;
    double ratio = 0.0;
    if (split.tr_plus > 0.0) {
      ratio = split.tr_minus > 0.0 ? split.tr_plus / split.tr_minus
                                   : std::numeric_limits<double>::infinity();
    }
    if (!rep.condition_1_4.worst_point || ratio > rep.condition_1_4.worst_ratio) {
      rep.condition_1_4.worst_ratio = ratio;
      rep.condition_1_4.worst_point = q;
    }
    if (split.tr_minus < split.tr_plus / c1) rep.condition_1_4.pass = false;
  }

  // condition (1.5)
  auto& c15 = rep.condition_1_5;
  if (rep.complement_bounded) {
    c15.pass = true;
    c15.vacuous = true;
    c15.note = all.empty() ? "no complement samples found" : "complement probe reports bounded";
    return rep;
  }
  for (const auto& s : fit_shells) {
    if (!s.complement_found) continue;
    double worst = 0.0;
    for (const auto& q : s.complement_points) {
      const double h = bank.hessian(q).norm();
      const double r3 = bank.r_geq(3, q);
      const double r4 = r3 * r3 * r3 * r3;
      worst = std::max(worst, h > 0.0 ? r4 / h : std::numeric_limits<double>::infinity());
    }
    c15.samples.emplace_back(s.radius, worst);
  }
  if (c15.samples.size() < 5) {
    c15.pass = false;
    c15.note = "fewer than 5 fit shells meet the complement; the limit cannot be estimated";
    return rep;
  }
  for (const auto& [r, v] : c15.samples) {
    if (!std::isfinite(v)) {
      c15.pass = false;
      c15.note = "Hessian vanishes at a complement sample";
      return rep;
    }
  }
  c15.fit = power_law_fit(c15.samples);
  const double first = c15.samples.front().first;
  const double last = c15.samples.back().first;
  for (const auto& [r, v] : c15.samples) {
    if (r <= 10.0 * first) c15.inner_decade_max = std::max(c15.inner_decade_max, v);
    if (r >= last / 10.0) c15.outer_decade_max = std::max(c15.outer_decade_max, v);
  }
  const bool decays = c15.fit->exponent < -0.05;
  const bool halves = c15.outer_decade_max < 0.5 * c15.inner_decade_max;
  c15.pass = decays && halves;
  if (!decays) c15.note = "fitted exponent is not below -0.05";
  else if (!halves) c15.note = "outer-decade maximum does not halve the inner-decade maximum";
  return rep;
}

double coercivity_function(const DerivativeBank& bank, double delta, std::span<const double> q) {
  const double g = bank.gradient(q).norm();
  const double h = bank.hessian(q).norm();
  return std::pow(g, 4.0 * (1.0 - delta) / 3.0) + std::pow(h, 1.0 - delta);
}

CoercivityReport coercivity_witness(const DerivativeBank& bank, double delta, int directions,
                                    std::span<const double> radii,
                                    std::span<const double> thresholds) {
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
  if (radii.empty()) throw InputError("radius schedule is empty");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1]))) {
      throw InputError("radius schedule must be positive and increasing");
    }
  }
  CoercivityReport rep;
  rep.delta = delta;
  rep.radii.assign(radii.begin(), radii.end());
  const auto dirs = probe_directions(bank.dimension(), directions);
  for (double r : radii) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& u : dirs) best = std::min(best, coercivity_function(bank, delta, scaled(u, r)));
    rep.min_f.push_back(best);
  }
  const std::size_t n = rep.min_f.size();
  rep.nondecreasing_tail = true;
  for (std::size_t i = n / 2 + 1; i < n; ++i) {
    rep.nondecreasing_tail = rep.nondecreasing_tail && rep.min_f[i] >= rep.min_f[i - 1];
  }
  rep.grows = rep.nondecreasing_tail && rep.min_f.back() > rep.min_f.front() * (1.0 + 1e-9);
  for (double a : thresholds) {
    std::optional<double> eta;
    for (std::size_t i = n; i-- > 0;) {
      if (rep.min_f[i] < a) break;
      eta = rep.radii[i];
    }
    rep.eta.emplace_back(a, eta);
  }
  return rep;
}

nlohmann::json to_json(const SigmaQuery& s) {
  return {{"kappa", s.kappa}, {"point", s.point}, {"member", s.member}, {"lhs", s.lhs}, {"rhs", s.rhs}};
}

nlohmann::json to_json(const ComplementScan& s) {
  nlohmann::json shells = nlohmann::json::array();
  for (const auto& sh : s.shells) {
    shells.push_back({{"radius", sh.radius},
                      {"complement_found", sh.complement_found},
                      {"min_margin", sh.min_margin},
                      {"complement_points", sh.complement_points}});
  }
  return {{"kappa", s.kappa},
          {"box_radius", s.box_radius},
          {"grid_per_axis", s.grid_per_axis},
          {"radial_probes", s.radial_probes},
          {"grid_points", s.grid_points},
          {"grid_complement_count", s.grid_complement.size()},
          {"verdict", to_string(s.verdict)},
          {"verdict_kind", "probe"},
          {"probe_radius_min", s.probe_radius_min},
          {"probe_radius_max", s.probe_radius_max},
          {"shells", shells}};
}

nlohmann::json to_json(const AssumptionReport& r) {
  const auto& c14 = r.condition_1_4;
  const auto& c15 = r.condition_1_5;
  nlohmann::json j14 = {{"pass", c14.pass},
                        {"worst_ratio_trplus_over_trminus",
                         std::isfinite(c14.worst_ratio) ? nlohmann::json(c14.worst_ratio) : nlohmann::json("inf")},
                        {"points_checked", c14.points_checked}};
  if (c14.worst_point) j14["worst_point"] = *c14.worst_point;
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& [rho, v] : c15.samples) samples.push_back({rho, v});
  nlohmann::json j15 = {{"pass", c15.pass},
                        {"vacuous", c15.vacuous},
                        {"inner_decade_max", c15.inner_decade_max},
                        {"outer_decade_max", c15.outer_decade_max},
                        {"samples", samples},
                        {"note", c15.note}};
  if (c15.fit) j15["fit"] = to_json(*c15.fit);
  return {{"kappa", r.kappa},
          {"c1", r.c1},
          {"condition_1_4", j14},
          {"condition_1_5", j15},
          {"complement_bounded", r.complement_bounded},
          {"verdict", to_string(r.verdict)},
          {"probe_radius_min", r.probe_radius_min},
          {"probe_radius_max", r.probe_radius_max},
          {"samples_used", r.samples_used},
          {"pass", r.pass()}};
}

nlohmann::json to_json(const CoercivityReport& r) {
  nlohmann::json eta = nlohmann::json::array();
  for (const auto& [a, e] : r.eta) eta.push_back({{"threshold", a}, {"radius", e ? nlohmann::json(*e) : nlohmann::json()}});
  return {{"delta", r.delta}, {"radii", r.radii}, {"min_f", r.min_f}, {"grows", r.grows},
          {"nondecreasing_tail", r.nondecreasing_tail}, {"eta", eta}};
}

}  // namespace kfplab
