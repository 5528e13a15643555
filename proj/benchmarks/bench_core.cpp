#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "kfplab/discrete_operator.hpp"
#include "kfplab/lanczos.hpp"
#include "kfplab/partition.hpp"
#include "kfplab/point_analysis.hpp"
#include "kfplab/sigma_region.hpp"

using namespace kfplab;

namespace {

Polynomial saddle() { return Polynomial::monomial(2, {2, 2}, -1.0); }

// -q1^2 (q1^2 + q2^2)^n
Polynomial radial(int n) {
  const Polynomial r2 = Polynomial::monomial(2, {2, 0}) + Polynomial::monomial(2, {0, 2});
  Polynomial p = Polynomial::monomial(2, {2, 0}, -1.0);
  for (int i = 0; i < n; ++i) p = p * r2;
  return p;
}

std::vector<std::vector<double>> points(int count) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<std::vector<double>> out(count);
  for (auto& q : out) q = {u(rng), u(rng)};
  return out;
}

void BM_Gradient(benchmark::State& state) {
  const DerivativeBank bank(radial(static_cast<int>(state.range(0))));
  const auto qs = points(256);
  for (auto _ : state) {
    for (const auto& q : qs) benchmark::DoNotOptimize(bank.gradient(q));
  }
  state.SetItemsProcessed(state.iterations() * qs.size());
}
BENCHMARK(BM_Gradient)->Arg(1)->Arg(3);

void BM_RGeq3(benchmark::State& state) {
  const DerivativeBank bank(radial(static_cast<int>(state.range(0))));
  const auto qs = points(256);
  for (auto _ : state) {
    for (const auto& q : qs) benchmark::DoNotOptimize(bank.r_geq(3, q));
  }
  state.SetItemsProcessed(state.iterations() * qs.size());
}
BENCHMARK(BM_RGeq3)->Arg(1)->Arg(3);

void BM_SigmaMembership(benchmark::State& state) {
  const DerivativeBank bank(saddle());
  const auto qs = points(256);
  for (auto _ : state) {
    for (const auto& q : qs) benchmark::DoNotOptimize(sigma_membership(bank, 800.0, q).member);
  }
  state.SetItemsProcessed(state.iterations() * qs.size());
}
BENCHMARK(BM_SigmaMembership);

void BM_MembershipGrid(benchmark::State& state) {
  const DerivativeBank bank(saddle());
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(membership_grid(bank, 800.0, 10.0, n).size());
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_MembershipGrid)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_PartitionBuild(benchmark::State& state) {
  const DerivativeBank bank(saddle());
  PartitionOptions opts;
  opts.slow_constant = 2.0;
  const double half = static_cast<double>(state.range(0));
  for (auto _ : state) {
    const PartitionSpec spec(bank, Box{{-half, -half}, {half, half}}, opts);
    benchmark::DoNotOptimize(spec.size());
  }
}
BENCHMARK(BM_PartitionBuild)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

DiscreteGrid grid2(int nq, int np) {
  DiscreteGrid g;
  g.d = 2;
  g.lq = 4.0;
  g.nq = nq;
  g.np = np;
  return g;
}

void BM_AssembleKfp(benchmark::State& state) {
  const DerivativeBank bank(saddle());
  const DiscreteGrid g = grid2(static_cast<int>(state.range(0)), 8);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_kfp(bank, g).matrix.nonZeros());
}
BENCHMARK(BM_AssembleKfp)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_KfpApply(benchmark::State& state) {
  const DiscreteOperator op = assemble_kfp(DerivativeBank(saddle()), grid2(static_cast<int>(state.range(0)), 8));
  const Eigen::VectorXd u = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(op.size()));
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(u).sum());
  state.SetItemsProcessed(state.iterations() * op.matrix.nonZeros());
}
BENCHMARK(BM_KfpApply)->Arg(16)->Arg(32);

void BM_WittenLowSpectrum(benchmark::State& state) {
  DiscreteGrid g;
  g.lq = 10.0;
  g.nq = static_cast<int>(state.range(0));
  g.np = 1;
  const DiscreteOperator op = assemble_witten(DerivativeBank(Polynomial::monomial(1, {2}, 0.5)), g);
  for (auto _ : state) benchmark::DoNotOptimize(low_spectrum(op, 3).values);
}
BENCHMARK(BM_WittenLowSpectrum)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
