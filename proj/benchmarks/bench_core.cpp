#include <benchmark/benchmark.h>

#include "rdest/dual_system.hpp"
#include "rdest/estimator.hpp"
#include "rdest/galerkin.hpp"
#include "rdest/mesh.hpp"
#include "rdest/problem.hpp"

namespace {

using namespace rdest;

void BM_AssembleOperator(benchmark::State& state) {
  const Mesh m = rectangle_mesh(static_cast<int>(state.range(0)), Diagonal::kCrissCross);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_operator(m, 1e2));
  state.counters["elements"] = m.num_elements();
}
BENCHMARK(BM_AssembleOperator)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Projection(benchmark::State& state) {
  const Mesh m = rectangle_mesh(static_cast<int>(state.range(0)), Diagonal::kCrissCross);
  const Problem p = make_problem("sinsin", 1e2);
  for (auto _ : state) {
    const DualSystem duals(m, p.kappa);
    benchmark::DoNotOptimize(duals.project(p.rhs));
  }
  state.counters["elements"] = m.num_elements();
}
BENCHMARK(BM_Projection)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Estimate(benchmark::State& state) {
  const Mesh m = rectangle_mesh(static_cast<int>(state.range(0)), Diagonal::kCrissCross);
  const Problem p = make_problem("sinsin", 1e2);
  const DiscreteFunction u =
      solve_galerkin(assemble_operator(m, p.kappa), assemble_load(m, p.rhs, 8), 1e-10);
  EstimatorOptions options;
  options.oscillation = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(estimate(m, p, u, options));
  state.counters["elements"] = m.num_elements();
}
BENCHMARK(BM_Estimate)->Args({16, 0})->Args({16, 1})->Args({32, 0})->Unit(benchmark::kMillisecond);

void BM_Bisect(benchmark::State& state) {
  const Mesh m = rectangle_mesh(static_cast<int>(state.range(0)), Diagonal::kCrissCross);
  std::vector<int> marked;
  for (int t = 0; t < m.num_elements(); t += 10) marked.push_back(t);
  for (auto _ : state) benchmark::DoNotOptimize(bisect(m, marked));
}
BENCHMARK(BM_Bisect)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
