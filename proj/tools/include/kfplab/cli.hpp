#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "kfplab/sigma_region.hpp"

namespace kfplab::cli {

enum class Command {
  Analyze,
  SigmaScan,
  CheckAssumption,
  Partition,
  ImsCheck,
  Subelliptic,
  Weyl,
  WittenSpectrum,
};

std::string to_string(Command c);
std::optional<Command> parse_command(const std::string& name);

/// Exit codes: 0 all checks pass, 2 a check failed, 1 usage or input error.
enum ExitCode : int { kPass = 0, kUsage = 1, kCheckFailed = 2 };

/// Unset optionals take a per-command default; see resolve().
struct RunConfig {
  Command command = Command::Analyze;
  std::string potential;  // path to polynomial JSON
  std::string out = "kfplab-out";
  double kappa = 800.0;
  double c1 = 1.0;
  std::uint64_t seed = 1;
  std::optional<double> box;
  std::optional<int> nq;
  std::optional<int> np;
  std::optional<int> grid;
  std::optional<double> lq;
  int probes = 360;
  double a = 0.0;
  double b = 0.0;
  int trials = 8;
  int fd_order = 4;
  std::string cutoff;  // ims-check: trivial, two-bump or partition
  double epsilon = -1.0;
  std::vector<int> n_list{4, 8, 16, 32};
  int k = 3;
  std::vector<double> point;  // analyze; origin when empty
  bool export_mtx = false;
  bool verbose = false;
};

/// Fills every per-command default that depends on the potential dimension.
RunConfig resolve(RunConfig config, int dimension);

/// Sorted-key JSON of the resolved config. Hashing its dump gives the
/// config hash recorded in the manifest.
nlohmann::json canonical_config(const RunConfig& config);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// %.17g, so the text round-trips to the same double.
std::string format_double(double x);

/// CSV with header q1,q2,member,lhs,rhs, one row per cell in grid order.
std::string contour_csv(std::span<const ContourCell> cells);
void emit_contour(std::span<const ContourCell> cells, int dimension, const std::string& path);

/// Runs one command, writes its artifacts plus manifest.json under
/// config.out and returns the exit code. Errors go to `err`.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace kfplab::cli
