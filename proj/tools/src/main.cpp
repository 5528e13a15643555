#include <iostream>

#include "CLI11.hpp"
#include "kfplab/cli.hpp"

using kfplab::cli::Command;

int main(int argc, char** argv) {
  CLI::App app{"kfplab: numerical checks for kinetic Fokker-Planck operators with polynomial potentials"};
  app.require_subcommand(1);
  app.fallthrough();

  kfplab::cli::RunConfig cfg;
  double box = 0, lq = 0;
  int nq = 0, np = 0, grid = 0;

  app.add_option("--potential", cfg.potential, "polynomial JSON file");
  app.add_option("--out", cfg.out, "output directory")->capture_default_str();
  app.add_option("--kappa", cfg.kappa, "Sigma(kappa) threshold")->capture_default_str();
  app.add_option("--c1", cfg.c1, "trace-ratio constant of the Hessian condition")->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  auto* box_opt = app.add_option("--box", box, "half-width of the scan or partition box");
  auto* nq_opt = app.add_option("--nq", nq, "q-grid nodes per axis")->check(CLI::PositiveNumber);
  auto* np_opt = app.add_option("--np", np, "Hermite modes per axis")->check(CLI::PositiveNumber);
  auto* grid_opt = app.add_option("--grid", grid, "scan grid points per axis")->check(CLI::PositiveNumber);
  auto* lq_opt = app.add_option("--lq", lq, "q-box half-width for discrete operators");
  app.add_option("--probes", cfg.probes, "directions per probe shell")->capture_default_str();
  app.add_option("--a", cfg.a, "partition support radius factor (0: automatic)");
  app.add_option("--b", cfg.b, "partition inner radius factor (0: a/2)");
  app.add_option("--trials", cfg.trials, "random test vectors")->capture_default_str();
  app.add_option("--fd-order", cfg.fd_order, "finite-difference order (2 or 4)")->capture_default_str();
  app.add_option("--cutoff", cfg.cutoff, "ims-check cutoff family: trivial, two-bump, partition");
  app.add_option("--epsilon", cfg.epsilon, "weyl: coefficient of q2^2")->capture_default_str();
  app.add_option("--n-list", cfg.n_list, "weyl: increasing sequence indices")->delimiter(',');
  app.add_option("--k", cfg.k, "number of low eigenvalues")->capture_default_str();
  app.add_option("--point", cfg.point, "analyze: evaluation point, comma separated")->delimiter(',');
  app.add_flag("--export-mtx", cfg.export_mtx, "also write the assembled operator in Matrix Market format");
  app.add_flag("--verbose", cfg.verbose, "analyze: report both index conventions");

  const std::pair<const char*, const char*> commands[] = {
      {"analyze", "pointwise derivative indicators and Sigma(kappa) membership"},
      {"sigma-scan", "grid and shell scan of the Sigma(kappa) complement; contour CSV for d = 2"},
      {"check-assumption", "empirical check of the Hessian trace and decay conditions"},
      {"partition", "slow-metric partition of unity on a box"},
      {"ims-check", "discrete localization identity under grid refinement"},
      {"subelliptic", "discrete witness constant of the global subelliptic estimate"},
      {"weyl", "Rayleigh quotients of the singular Weyl sequence"},
      {"witten-spectrum", "low eigenvalues of the discrete Witten Laplacian"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  CLI11_PARSE(app, argc, argv);

  cfg.command = *kfplab::cli::parse_command(app.get_subcommands().front()->get_name());
  if (*box_opt) cfg.box = box;
  if (*nq_opt) cfg.nq = nq;
  if (*np_opt) cfg.np = np;
  if (*grid_opt) cfg.grid = grid;
  if (*lq_opt) cfg.lq = lq;
  return kfplab::cli::run(cfg, std::cout, std::cerr);
}
