#include "kfplab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "kfplab/discrete_operator.hpp"
#include "kfplab/errors.hpp"
#include "kfplab/ims.hpp"
#include "kfplab/lanczos.hpp"
#include "kfplab/partition.hpp"
#include "kfplab/point_analysis.hpp"
#include "kfplab/polynomial.hpp"
#include "kfplab/subelliptic.hpp"
#include "kfplab/weyl.hpp"

#ifndef KFPLAB_VERSION
#define KFPLAB_VERSION "0.0.0"
#endif

namespace kfplab::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kNames[] = {"analyze",     "sigma-scan", "check-assumption", "partition",
                                  "ims-check",   "subelliptic", "weyl",            "witten-spectrum"};

struct Check {
  std::string name;
  bool pass = false;
  json detail;
};

// Writes artifacts under the output directory and remembers their hashes.
class ArtifactSink {
 public:
  explicit ArtifactSink(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& bytes) {
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write " + (dir_ / name).string());
    f << bytes;
    entries_.push_back({{"file", name}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a64(bytes))}});
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(1) + "\n"); }

  const json& entries() const { return entries_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  json entries_ = json::array();
};

Polynomial load_potential(const RunConfig& c) {
  if (c.potential.empty()) throw InputError("--potential is required for " + to_string(c.command));
  Polynomial p = load_polynomial(c.potential);
  if (p.is_zero()) throw InputError("zero polynomial rejected");
  return p;
}

DiscreteGrid grid_of(const RunConfig& c, int d) {
  DiscreteGrid g;
  g.d = d;
  g.lq = *c.lq;
  g.nq = *c.nq;
  g.np = *c.np;
  g.fd_order = c.fd_order;
  return g;
}

Box symmetric_box(int d, double r) {
  if (!(r > 0.0)) throw InputError("--box must be positive");
  return {std::vector<double>(d, -r), std::vector<double>(d, r)};
}

std::vector<Check> cmd_analyze(const RunConfig& c, const Polynomial& poly, ArtifactSink& sink) {
  const DerivativeBank bank(poly);
  std::vector<double> q = c.point.empty() ? std::vector<double>(poly.dimension(), 0.0) : c.point;
  const double kappas[] = {c.kappa};
  const PointAnalysis a = analyze_point(bank, q, kappas, c.verbose);
  sink.write_json("analysis.json", {{"potential", poly.to_json()},
                                    {"degree", poly.degree()},
                                    {"polynomial", poly.to_string()},
                                    {"point", to_json(a)}});
  return {};
}

std::vector<Check> cmd_sigma_scan(const RunConfig& c, const Polynomial& poly, ArtifactSink& sink) {
  const DerivativeBank bank(poly);
  const int d = poly.dimension();
  const ComplementScan scan = scan_complement(bank, c.kappa, *c.box, d <= 3 ? *c.grid : 0, c.probes);
  sink.write_json("scan.json", to_json(scan));
  if (d == 2) {
    const auto cells = membership_grid(bank, c.kappa, *c.box, *c.grid);
    sink.write("contour.csv", contour_csv(cells));
  }
  return {};
}

std::vector<Check> cmd_check_assumption(const RunConfig& c, const Polynomial& poly, ArtifactSink& sink) {
  const DerivativeBank bank(poly);
  AssumptionScanParams params;
  params.box_radius = *c.box;
  params.grid_per_axis = *c.grid;
  params.radial_probes = c.probes;
  const AssumptionReport rep = check_assumption(bank, c.kappa, c.c1, params);
  sink.write_json("assumption.json", to_json(rep));
  return {{"condition_1_4", rep.condition_1_4.pass, rep.condition_1_4.worst_ratio},
          {"condition_1_5", rep.condition_1_5.pass,
           rep.condition_1_5.fit ? json(rep.condition_1_5.fit->exponent) : json(nullptr)}};
}

std::vector<Check> cmd_partition(const RunConfig& c, const Polynomial& poly, ArtifactSink& sink) {
  const DerivativeBank bank(poly);
  PartitionOptions opts;
  opts.a = c.a;
  opts.b = c.b;
  opts.seed = c.seed;
  const PartitionSpec spec(bank, symmetric_box(poly.dimension(), *c.box), opts);
  const PartitionDiagnostics diag = partition_diagnostics(spec, bank, 10000, c.seed);
  sink.write_json("partition.json", spec.to_json(true));
  sink.write_json("partition_diagnostics.json", to_json(diag));
  return {{"unity", diag.max_unity_defect <= 1e-10, diag.max_unity_defect},
          {"overlap", static_cast<double>(spec.observed_overlap()) <= spec.overlap_bound(),
           {{"observed", spec.observed_overlap()}, {"bound", spec.overlap_bound()}}}};
}

std::vector<Check> cmd_ims(const RunConfig& c, const Polynomial& poly, ArtifactSink& sink) {
  const DerivativeBank bank(poly);
  const int d = poly.dimension();
  const DiscreteGrid grid = grid_of(c, d);
  std::optional<PartitionSpec> spec;
  CutoffFamily family;
  if (c.cutoff == "trivial") {
    family = trivial_cutoff(d);
  } else if (c.cutoff == "two-bump") {
    if (d != 1) throw InputError("two-bump cutoff needs d = 1");
    family = two_bump_cutoff(0.0, 1.0);
  } else if (c.cutoff == "partition") {
    PartitionOptions opts;
    opts.a = c.a;
    opts.b = c.b;
    opts.seed = c.seed;
    spec.emplace(bank, symmetric_box(d, grid.lq), opts);
    family = partition_cutoff(*spec);
  } else {
    throw InputError("unknown cutoff family '" + c.cutoff + "'");
  }
  if (c.cutoff == "trivial") {
    const ImsReport rep = ims_identity_check(bank, grid, family, c.trials, c.seed);
    sink.write_json("ims.json", to_json(rep));
    return {{"trivial_exact", rep.max_relative_defect <= 1e-12, rep.max_relative_defect}};
  }
  const int nq_list[] = {grid.nq, 2 * grid.nq, 4 * grid.nq};
  const ImsRefinement ref = ims_refinement(bank, grid, family, nq_list, c.trials, c.seed);
  sink.write_json("ims.json", to_json(ref));
  return {{"order", std::abs(ref.order - grid.fd_order) <= 0.3, ref.order}};
}

std::vector<Check> cmd_subelliptic(const RunConfig& c, const Polynomial& poly, ArtifactSink& sink) {
  const DerivativeBank bank(poly);
  const DiscreteGrid coarse = grid_of(c, poly.dimension());
  DiscreteGrid fine = coarse;
  fine.nq = static_cast<int>(std::lround(1.5 * coarse.nq));
  fine.np = static_cast<int>(std::lround(1.5 * coarse.np));
  const RefinementTrace trace = subelliptic_refinement(bank, {coarse, fine}, c.trials, c.seed);
  sink.write_json("estimate.json", to_json(trace));
  if (c.export_mtx) sink.write("kfp.mtx", matrix_market_string(assemble_kfp(bank, coarse).matrix));
  return {{"stable_c", std::isfinite(trace.growth) && trace.growth <= 0.5, trace.growth}};
}

std::vector<Check> cmd_weyl(const RunConfig& c, ArtifactSink& sink) {
  const WeylReport rep = weyl_rayleigh(c.epsilon, c.n_list);
  json j = to_json(rep);
  json overlaps = json::array();
  for (std::size_t i = 0; i + 1 < c.n_list.size(); ++i) {
    overlaps.push_back({{"n", c.n_list[i]},
                        {"m", c.n_list[i + 1]},
                        {"inner_product", weyl_overlap(c.epsilon, c.n_list[i], c.n_list[i + 1])}});
  }
  j["overlaps"] = overlaps;
  sink.write_json("weyl.json", j);
  const double e = rep.fit.exponent;
  return {{"exponent", rep.points.size() >= 2 && e >= -2.3 && e <= -1.7, e}};
}

std::vector<Check> cmd_witten(const RunConfig& c, const Polynomial& poly, ArtifactSink& sink) {
  const DerivativeBank bank(poly);
  const DiscreteOperator op = assemble_witten(bank, grid_of(c, poly.dimension()));
  SpectrumOptions opts;
  opts.seed = c.seed;
  const SpectrumResult res = low_spectrum(op, c.k, opts);
  json j = to_json(res);
  j["grid"] = to_json(op.grid);
  sink.write_json("spectrum.json", j);
  if (c.export_mtx) sink.write("witten.mtx", matrix_market_string(op.matrix));
  return {{"converged", res.converged, res.matvecs}};
}

}  // namespace

std::string to_string(Command c) { return kNames[static_cast<int>(c)]; }

std::optional<Command> parse_command(const std::string& name) {
  for (int i = 0; i < 8; ++i)
    if (name == kNames[i]) return static_cast<Command>(i);
  return std::nullopt;
}

RunConfig resolve(RunConfig c, int d) {
  auto fill = [](auto& slot, auto v) {
    if (!slot) slot = v;
  };
  switch (c.command) {
    case Command::SigmaScan:
      fill(c.box, 10.0);
      fill(c.grid, 64);
      break;
    case Command::CheckAssumption: {
      const AssumptionScanParams p;
      fill(c.box, p.box_radius);
      fill(c.grid, p.grid_per_axis);
      break;
    }
    case Command::Partition:
      fill(c.box, 3.0);
      break;
    case Command::ImsCheck:
      fill(c.nq, 64);
      fill(c.np, 8);
      fill(c.lq, 6.0);
      if (c.cutoff.empty()) c.cutoff = d == 1 ? "two-bump" : "partition";
      break;
    case Command::Subelliptic:
      fill(c.nq, d == 1 ? 64 : 32);
      fill(c.np, 8);
      fill(c.lq, d == 1 ? 8.0 : 4.0);
      break;
    case Command::WittenSpectrum:
      fill(c.nq, 256);
      fill(c.np, 4);
      fill(c.lq, 10.0);
      break;
    case Command::Analyze:
    case Command::Weyl:
      break;
  }
  return c;
}

json canonical_config(const RunConfig& c) {
  json j = {{"command", to_string(c.command)}, {"seed", c.seed}};
  auto opt = [&j](const char* key, const auto& v) {
    if (v) j[key] = *v;
  };
  switch (c.command) {
    case Command::Analyze:
      j["kappa"] = c.kappa;
      j["point"] = c.point;
      j["verbose"] = c.verbose;
      break;
    case Command::SigmaScan:
      j["kappa"] = c.kappa;
      j["probes"] = c.probes;
      opt("box", c.box);
      opt("grid", c.grid);
      break;
    case Command::CheckAssumption:
      j["kappa"] = c.kappa;
      j["c1"] = c.c1;
      j["probes"] = c.probes;
      opt("box", c.box);
      opt("grid", c.grid);
      break;
    case Command::Partition:
      j["a"] = c.a;
      j["b"] = c.b;
      opt("box", c.box);
      break;
    case Command::ImsCheck:
      j["cutoff"] = c.cutoff;
      j["trials"] = c.trials;
      j["fd_order"] = c.fd_order;
      j["a"] = c.a;
      j["b"] = c.b;
      opt("nq", c.nq);
      opt("np", c.np);
      opt("lq", c.lq);
      break;
    case Command::Subelliptic:
      j["trials"] = c.trials;
      j["fd_order"] = c.fd_order;
      j["export_mtx"] = c.export_mtx;
      opt("nq", c.nq);
      opt("np", c.np);
      opt("lq", c.lq);
      break;
    case Command::Weyl:
      j["epsilon"] = c.epsilon;
      j["n_list"] = c.n_list;
      break;
    case Command::WittenSpectrum:
      j["k"] = c.k;
      j["fd_order"] = c.fd_order;
      j["export_mtx"] = c.export_mtx;
      opt("nq", c.nq);
      opt("lq", c.lq);
      break;
  }
  if (c.command != Command::Weyl) j["potential"] = c.potential;
  return j;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string contour_csv(std::span<const ContourCell> cells) {
  std::string out = "q1,q2,member,lhs,rhs\n";
  for (const auto& cell : cells) {
    out += format_double(cell.q1) + ',' + format_double(cell.q2) + ',' + (cell.member ? '1' : '0') + ',' +
           format_double(cell.lhs) + ',' + format_double(cell.rhs) + '\n';
  }
  return out;
}

void emit_contour(std::span<const ContourCell> cells, int dimension, const std::string& path) {
  if (dimension != 2) throw InputError("contour export needs a 2-d scan, got d = " + std::to_string(dimension));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write " + path);
  f << contour_csv(cells);
}

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    std::optional<Polynomial> poly;
    int d = 2;
    if (config.command != Command::Weyl) {
      poly = load_potential(config);
      d = poly->dimension();
    }
    const RunConfig c = resolve(config, d);
    if (c.fd_order != 2 && c.fd_order != 4) throw InputError("--fd-order must be 2 or 4");
    ArtifactSink sink(c.out);

    std::vector<Check> checks;
    switch (c.command) {
      case Command::Analyze: checks = cmd_analyze(c, *poly, sink); break;
      case Command::SigmaScan: checks = cmd_sigma_scan(c, *poly, sink); break;
      case Command::CheckAssumption: checks = cmd_check_assumption(c, *poly, sink); break;
      case Command::Partition: checks = cmd_partition(c, *poly, sink); break;
      case Command::ImsCheck: checks = cmd_ims(c, *poly, sink); break;
      case Command::Subelliptic: checks = cmd_subelliptic(c, *poly, sink); break;
      case Command::Weyl: checks = cmd_weyl(c, sink); break;
      case Command::WittenSpectrum: checks = cmd_witten(c, *poly, sink); break;
    }

    bool pass = true;
    json jchecks = json::array();
    for (const auto& ch : checks) {
      pass = pass && ch.pass;
      jchecks.push_back({{"name", ch.name}, {"pass", ch.pass}, {"value", ch.detail}});
      log << (ch.pass ? "PASS " : "FAIL ") << ch.name << ' ' << ch.detail.dump() << '\n';
    }
    const json cfg = canonical_config(c);
    json manifest = {{"tool", "kfplab"},
                     {"version", KFPLAB_VERSION},
                     {"command", to_string(c.command)},
                     {"config", cfg},
                     {"config_hash", hex64(fnv1a64(cfg.dump()))},
                     {"seed", c.seed},
                     {"checks", jchecks},
                     {"status", pass ? "pass" : "fail"},
                     {"artifacts", sink.entries()}};
    if (poly) manifest["potential"] = poly->to_json();
    std::ofstream(sink.dir() / "manifest.json", std::ios::binary | std::ios::trunc) << manifest.dump(1) << '\n';
    log << "wrote " << sink.entries().size() << " artifact(s) to " << sink.dir().string() << '\n';
    return pass ? kPass : kCheckFailed;
  } catch (const BudgetError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace kfplab::cli
