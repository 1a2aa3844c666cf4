#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "lase/algorithms.hpp"
#include "lase/problems.hpp"

namespace lase {

// Base-learning-rate regimes. Nonsmooth uses alpha = 1; Smooth uses
// alpha = 1/sqrt(M); SmoothEps uses alpha = T^eps / sqrt(M) with
// eps in (0, 1/2).
enum class AlphaMode { Nonsmooth, Smooth, SmoothEps };

// Parameter-server shape of one run: M workers, R rounds, K local steps per
// round (or one count per worker in the asynchronous variant), and the
// solver driving the local steps. A synchronous run performs T = K*R local
// steps per worker and communicates at the start of every round.
struct Topology {
  int workers = 4;  // M
  int rounds = 40;  // R
  // One entry: the common K. `workers` entries: per-worker counts, still
  // synchronized at the round barrier.
  std::vector<int> local_steps = {50};
  SolverKind solver;
  AlphaMode alpha_mode = AlphaMode::Nonsmooth;
  double eps = 0.25;        // SmoothEps exponent
  double grad_guess = 1.0;  // G0
  std::uint64_t master_seed = 1;
  // Normally D comes from the feasible set; the override exists for
  // experiments probing a mis-specified D.
  std::optional<double> diameter_override;

  bool uniform_steps() const { return local_steps.size() == 1; }
  int steps_for(int worker) const {
    return uniform_steps() ? local_steps[0]
                           : local_steps[static_cast<std::size_t>(worker)];
  }
  int max_local_steps() const;
  // T = max_m K_m * R, the per-worker iteration budget.
  std::int64_t planned_iterations() const;
  double resolve_alpha() const;
  void validate() const;  // throws ConfigError
};

enum class RecordEvery { Round, Iteration };

struct TrajectoryRow {
  int round = 0;
  std::int64_t iteration = 0;
  double residual = 0.0;  // KKT residual of the current aggregated iterate
  double dual_gap = 0.0;  // duality gap of the running averaged output
  double eta_min = 0.0;
  double eta_max = 0.0;
  double v_max = 0.0;  // max over workers of sqrt(sum ||g||^2 + ||M||^2)
  std::int64_t samples = 0;
  double wall_ms = 0.0;
};

// Snapshot of one communication, for protocol verification: the reported
// learning rates, the aggregation weights, and every worker's anchor right
// after re-anchoring (they must be bitwise identical).
struct RoundCheck {
  int round = 0;
  std::vector<double> etas;
  std::vector<double> weights;
  std::vector<Iterate> anchors;
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  Iterate final_output;  // grand average of half iterates, the official output
  Iterate final_full_average;  // grand average of full iterates (diagnostic)
  // Aggregated current iterate at the end of the run: what the next
  // communication would anchor at. The residual column tracks this point.
  Iterate last_anchor;
  double initial_residual = 0.0;
  double gamma_observed = 0.0;  // max(G_obs/G0, G0/G_obs)
  double v_over_sqrt_t = 0.0;   // final v_max / sqrt(T)
  std::int64_t total_samples = 0;
};

struct RunOptions {
  RecordEvery record_every = RecordEvery::Round;
  // Worker phases within a round may run on this many threads; the result
  // is identical to the single-threaded schedule.
  int threads = 1;
  // Verify per-step and per-round contracts inline; violations throw.
  bool check_invariants = true;
  std::vector<StepRecord>* step_sink = nullptr;
  std::vector<RoundCheck>* round_sink = nullptr;
};

// Runs R rounds of the parameter-server loop: every round re-anchors all
// workers at the aggregated iterate, then each worker performs its local
// steps. Deterministic given (topology, problem): the trajectory, minus
// wall-clock columns, is a pure function of the configuration.
Trajectory run(const Topology& topology, const SaddleProblem& problem,
               const RunOptions& options = {});

// One grid point of a sweep.
struct SweepJob {
  std::shared_ptr<const SaddleProblem> problem;
  Topology topology;
  RunOptions options;
};

// Runs every job; jobs may execute on `threads` threads (0 = hardware
// concurrency) with results identical to serial execution.
std::vector<Trajectory> sweep(std::span<const SweepJob> jobs, int threads = 0);

}  // namespace lase
