#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "kfplab/cli.hpp"
#include "kfplab/errors.hpp"

using namespace kfplab;
using namespace kfplab::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kData = KFPLAB_DATA_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kfplab_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_config(const RunConfig& c) {
  std::ostringstream out, err;
  const int code = run(c, out, err);
  return {code, out.str(), err.str()};
}

RunConfig config(Command cmd, const std::string& potential, const fs::path& out) {
  RunConfig c;
  c.command = cmd;
  c.potential = potential.empty() ? "" : (kData / potential).string();
  c.out = out.string();
  return c;
}

Polynomial parabola(double eps) {
  const Polynomial a = Polynomial::monomial(2, {2, 0}) - Polynomial::monomial(2, {0, 1});
  return a * a + Polynomial::monomial(2, {0, 2}, eps);
}

}  // namespace

TEST(Contour, MinimalGridFormat) {
  const DerivativeBank bank(Polynomial::monomial(2, {2, 2}, -1.0));
  const auto cells = membership_grid(bank, 800.0, 1.0, 2);
  const std::string csv = contour_csv(cells);
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "q1,q2,member,lhs,rhs");
  EXPECT_EQ(lines[1].substr(0, 6), "-1,-1,");
  EXPECT_EQ(lines[2].substr(0, 5), "1,-1,");
}

TEST(Contour, DoublesRoundTrip) {
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(-10.0), "-10");
}

TEST(Contour, LinearPotentialAllMembers) {
  const DerivativeBank bank(Polynomial::monomial(2, {1, 0}));
  for (const auto& c : membership_grid(bank, 0.1, 5.0, 16)) {
    EXPECT_TRUE(c.member);
    EXPECT_NEAR(c.lhs, 1.0, 1e-15);
  }
}

TEST(Contour, ConfinedParabolaIsABlob) {
  const DerivativeBank bank(parabola(0.5));
  const double box = 5e4;
  std::size_t complement = 0;
  for (const auto& c : membership_grid(bank, 2.0, box, 101)) {
    if (c.member) continue;
    ++complement;
    EXPECT_LT(std::hypot(c.q1, c.q2), 0.5 * box);
  }
  EXPECT_GT(complement, 0u);
}

TEST(Contour, RequiresTwoDimensions) {
  std::vector<ContourCell> cells(3);
  EXPECT_THROW(emit_contour(cells, 3, (scratch("c3") / "x.csv").string()), InputError);
}

TEST(Hash, Fnv1a64Vectors) {
  EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
  EXPECT_EQ(hex64(fnv1a64("foobar")), "85944171f73967e8");
}

TEST(Run, SigmaScanWritesCsvAndManifest) {
  const fs::path out = scratch("scan");
  RunConfig c = config(Command::SigmaScan, "saddle_product.json", out);
  c.grid = 32;
  const Outcome o = run_config(c);
  EXPECT_EQ(o.code, kPass) << o.err;
  ASSERT_TRUE(fs::exists(out / "contour.csv"));
  ASSERT_TRUE(fs::exists(out / "manifest.json"));
  const auto csv = slurp(out / "contour.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 32 * 32 + 1);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["command"], "sigma-scan");
  EXPECT_EQ(manifest["seed"], 1);
  EXPECT_EQ(manifest["version"], "0.3.0");
  EXPECT_EQ(manifest["config"]["box"], 10.0);
  const auto scan = nlohmann::json::parse(slurp(out / "scan.json"));
  EXPECT_EQ(scan["verdict"], "unbounded");
}

TEST(Run, ManifestReachesEveryArtifact) {
  const fs::path out = scratch("reach");
  RunConfig c = config(Command::WittenSpectrum, "harmonic_1d.json", out);
  c.export_mtx = true;
  c.nq = 64;
  ASSERT_EQ(run_config(c).code, kPass);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  std::set<std::string> listed;
  for (const auto& a : manifest["artifacts"]) {
    listed.insert(a["file"].get<std::string>());
    EXPECT_EQ(a["fnv1a64"], hex64(fnv1a64(slurp(out / a["file"].get<std::string>()))));
  }
  for (const auto& e : fs::directory_iterator(out)) {
    const auto name = e.path().filename().string();
    if (name != "manifest.json") {
      EXPECT_TRUE(listed.count(name)) << name;
    }
  }
  EXPECT_TRUE(listed.count("witten.mtx"));
  EXPECT_EQ(manifest["config_hash"], hex64(fnv1a64(manifest["config"].dump())));
}

TEST(Run, CheckAssumptionExitCodes) {
  EXPECT_EQ(run_config(config(Command::CheckAssumption, "radial_n2.json", scratch("n2"))).code, kCheckFailed);
  const fs::path out = scratch("n1");
  EXPECT_EQ(run_config(config(Command::CheckAssumption, "radial_n1.json", out)).code, kPass);
  const auto rep = nlohmann::json::parse(slurp(out / "assumption.json"));
  EXPECT_TRUE(rep["condition_1_5"]["pass"].get<bool>());
}

TEST(Run, ZeroPolynomialRejected) {
  const Outcome o = run_config(config(Command::Analyze, "zero.json", scratch("zero")));
  EXPECT_EQ(o.code, kUsage);
  EXPECT_NE(o.err.find("zero polynomial rejected"), std::string::npos);
}

TEST(Run, MalformedJsonReportsPosition) {
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{\"d\": 2,\n \"terms\": [{\"alpha\": [1, 0], \"c\": }]}";
  RunConfig c = config(Command::Analyze, "", dir / "out");
  c.potential = (dir / "bad.json").string();
  const Outcome o = run_config(c);
  EXPECT_EQ(o.code, kUsage);
  EXPECT_NE(o.err.find("line 2"), std::string::npos) << o.err;
  EXPECT_NE(o.err.find("column"), std::string::npos) << o.err;
}

TEST(Run, MissingPotentialIsUsageError) {
  EXPECT_EQ(run_config(config(Command::SigmaScan, "", scratch("none"))).code, kUsage);
  EXPECT_EQ(run_config(config(Command::SigmaScan, "does_not_exist.json", scratch("none"))).code, kUsage);
}

TEST(Run, BudgetExceededNamesLimit) {
  setenv("KFPLAB_MATRIX_BUDGET", "1000", 1);
  RunConfig c = config(Command::Subelliptic, "harmonic_1d.json", scratch("budget"));
  const Outcome o = run_config(c);
  unsetenv("KFPLAB_MATRIX_BUDGET");
  EXPECT_EQ(o.code, kUsage);
  EXPECT_NE(o.err.find("1000"), std::string::npos) << o.err;
  EXPECT_NE(o.err.find("KFPLAB_MATRIX_BUDGET"), std::string::npos) << o.err;
}

TEST(Run, AnalyzeVerboseShowsBothConventions) {
  const fs::path out = scratch("analyze");
  RunConfig c = config(Command::Analyze, "saddle_product.json", out);
  c.point = {1.0, 1.0};
  c.verbose = true;
  ASSERT_EQ(run_config(c).code, kPass);
  const auto j = nlohmann::json::parse(slurp(out / "analysis.json"));
  EXPECT_NEAR(j["point"]["gradient_norm"].get<double>(), 2.0 * std::sqrt(2.0), 1e-14);
  EXPECT_TRUE(j["point"].contains("r_geq_ordered_tuples"));
  c.point = {1.0};
  EXPECT_EQ(run_config(c).code, kUsage);
}

TEST(Run, WeylNeedsNoPotential) {
  const fs::path out = scratch("weyl");
  RunConfig c = config(Command::Weyl, "", out);
  EXPECT_EQ(run_config(c).code, kPass);
  c.epsilon = 0.5;
  EXPECT_EQ(run_config(c).code, kUsage);
}

TEST(Run, IdenticalConfigsAreByteIdentical) {
  const std::pair<Command, const char*> cases[] = {
      {Command::SigmaScan, "parabola_eps0.5.json"},
      {Command::Partition, "saddle_product.json"},
      {Command::ImsCheck, "quartic_1d.json"},
      {Command::Subelliptic, "harmonic_1d.json"},
  };
  for (const auto& [cmd, pot] : cases) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    RunConfig ca = config(cmd, pot, a), cb = config(cmd, pot, b);
    ASSERT_EQ(run_config(ca).code, run_config(cb).code);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << to_string(cmd) << " " << e.path().filename();
    }
    EXPECT_GE(files, 2u);
  }
}

TEST(Run, CommandNamesRoundTrip) {
  for (const char* name : {"analyze", "sigma-scan", "check-assumption", "partition", "ims-check", "subelliptic", "weyl",
                           "witten-spectrum"}) {
    const auto c = parse_command(name);
    ASSERT_TRUE(c);
    EXPECT_EQ(to_string(*c), name);
  }
  EXPECT_FALSE(parse_command("plot"));
}
