#include <benchmark/benchmark.h>

#include "lase/bilinear.hpp"
#include "lase/simulator.hpp"

namespace {

using namespace lase;

BilinearProblem make_problem(Eigen::Index n, double sigma) {
  RngStream gen(42, stream_ids::problem_generator);
  return BilinearProblem::generate(n, sigma, gen);
}

void BM_BoxProjection(benchmark::State& state) {
  const auto set = FeasibleSet::symmetric_box(state.range(0));
  RngStream rng(1, 0);
  const Eigen::VectorXd z = rng.uniform_vector(state.range(0), -3.0, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(set.project(z));
}
BENCHMARK(BM_BoxProjection)->Arg(20)->Arg(200);

void BM_OracleEval(benchmark::State& state) {
  const auto p = make_problem(state.range(0), 0.1);
  RngStream rng(1, 0);
  const Iterate z = p.start_point();
  for (auto _ : state) benchmark::DoNotOptimize(p.oracle(z, rng));
}
BENCHMARK(BM_OracleEval)->Arg(10)->Arg(100);

void BM_ExtragradientStep(benchmark::State& state) {
  const auto p = make_problem(state.range(0), 0.1);
  WorkerState w = WorkerState::init(
      p, AdaptiveState::init(p.domain().diameter_bound(), 1.0, 1.0),
      RngStream(1, 0));
  for (auto _ : state) {
    w = extragradient_step(std::move(w), p);
    benchmark::DoNotOptimize(w.adaptive.eta);
  }
}
BENCHMARK(BM_ExtragradientStep)->Arg(10)->Arg(100);

void BM_SyncRun(benchmark::State& state) {
  const auto p = make_problem(10, 0.1);
  Topology t;
  t.workers = 4;
  t.rounds = static_cast<int>(state.range(0));
  t.local_steps = {50};
  RunOptions opts;
  opts.check_invariants = false;
  for (auto _ : state) benchmark::DoNotOptimize(run(t, p, opts));
}
BENCHMARK(BM_SyncRun)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ServerAggregate(benchmark::State& state) {
  RngStream rng(3, 0);
  std::vector<WorkerReport> reports;
  for (int m = 0; m < state.range(0); ++m)
    reports.push_back({rng.uniform(0.01, 1.0),
                       Iterate{rng.uniform_vector(10, -1.0, 1.0),
                               rng.uniform_vector(10, -1.0, 1.0)}});
  for (auto _ : state) benchmark::DoNotOptimize(server_aggregate(reports));
}
BENCHMARK(BM_ServerAggregate)->Arg(4)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
