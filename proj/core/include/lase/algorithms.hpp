#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lase/problems.hpp"

namespace lase {

// Per-worker learning-rate accumulator. Maintains
//   eta = diameter * base_lr / sqrt(grad_guess^2 + accumulator)
// at all times, where the accumulator sums the squared update magnitudes
//   (||half - anchor||^2 + ||half - full||^2) / (5 eta^2)
// of the completed steps. eta is nonincreasing over a worker's lifetime and
// starts at diameter * base_lr / grad_guess.
struct AdaptiveState {
  double diameter = 1.0;    // D
  double grad_guess = 1.0;  // G0, the initial gradient-bound guess
  double base_lr = 1.0;     // alpha
  double accumulator = 0.0;
  double eta = 1.0;

  static AdaptiveState init(double diameter, double grad_guess,
                            double base_lr);
};

// Folds the step just completed (taken with s.eta) into the accumulator and
// recomputes eta. Zero movement leaves eta unchanged; eta never increases.
AdaptiveState eta_update(AdaptiveState s, const Iterate& half,
                         const Iterate& anchor, const Iterate& full);

// Scalar trace of one solver step, enough to audit every per-step contract
// without re-running it.
struct StepRecord {
  int worker = -1;  // filled by the simulator; -1 for standalone steps
  int round = 0;
  double eta = 0.0;               // step size the step used
  double m_norm = 0.0;            // oracle norm at the anchor
  double g_norm = 0.0;            // oracle norm at the half point
  double gm_diff_norm = 0.0;      // ||g - M||
  double half_anchor_dist = 0.0;  // ||half - anchor||
  double full_half_dist = 0.0;    // ||full - half||
  double z_sq = 0.0;              // squared update magnitude added
  double eta_after = 0.0;
  double accumulator_after = 0.0;
  Iterate half;
  Iterate full;
};

// Everything one worker owns: the anchor the next step starts from, the two
// iterates of the last step, the adaptive learning rate, the running sums
// behind the averaged output, the cumulative squared oracle norms, and an
// exclusive random stream.
struct WorkerState {
  Iterate anchor;
  Iterate last_half;
  Iterate last_full;
  AdaptiveState adaptive;
  Iterate half_sum;  // running sum of half iterates; the official output
  Iterate full_sum;  // running sum of full iterates; diagnostic only
  std::int64_t steps = 0;
  double v_accumulator = 0.0;  // running sum ||g||^2 + ||M||^2
  double max_oracle_norm = 0.0;
  std::int64_t oracle_samples = 0;
  RngStream stream;

  static WorkerState init(const SaddleProblem& p, AdaptiveState adaptive,
                          RngStream stream);
};

// One extragradient step from w.anchor:
//   M    = oracle(anchor)
//   half = P(anchor - eta M)
//   g    = oracle(half)
//   full = P(anchor - eta g)
// The step uses the current eta; when adapt_eta is set the learning rate is
// updated afterwards, so eta at step t depends only on steps 1..t-1. The
// returned state is re-anchored at `full`, ready for the next local step.
WorkerState extragradient_step(WorkerState w, const SaddleProblem& p,
                               bool adapt_eta = true,
                               StepRecord* record = nullptr);

// Runs `steps` extragradient steps, each re-anchoring at the previous full
// iterate. Deterministic given w.stream.
WorkerState local_phase(WorkerState w, const SaddleProblem& p, int steps,
                        bool adapt_eta = true,
                        std::vector<StepRecord>* records = nullptr);

// One projected gradient descent-ascent step (simultaneous in both blocks):
//   next = P(anchor - eta * oracle(anchor)).
WorkerState gda_step(WorkerState w, const SaddleProblem& p,
                     StepRecord* record = nullptr);

// Inverse-eta weights w_m = (1/eta_m) / sum_m' (1/eta_m'); they sum to one
// and pull the average towards workers with smaller learning rates.
std::vector<double> aggregation_weights(std::span<const double> etas);

struct WorkerReport {
  double eta;
  Iterate iterate;
};

// Inverse-eta weighted average of the reported iterates. The output lies in
// the convex hull of the inputs, hence stays feasible.
Iterate server_aggregate(std::span<const WorkerReport> reports);

// Plain unweighted mean; the aggregation rule for the baseline solvers.
Iterate mean_aggregate(std::span<const WorkerReport> reports);

enum class SolverFamily {
  LocalAdaSEG,   // adaptive extragradient with local steps
  SEGDA,         // fixed-step extragradient (serial baseline)
  MinibatchEG,   // server-side extragradient over pooled minibatches
  LocalSGDA,     // fixed-step gradient descent-ascent with local steps
  LocalSEGDA,    // fixed-step extragradient with local steps
};

std::string to_string(SolverFamily f);
std::optional<SolverFamily> solver_family_from_string(const std::string& s);

struct SolverKind {
  SolverFamily family = SolverFamily::LocalAdaSEG;
  // Fixed step size for the non-adaptive solvers. Unset means the default
  // scale diameter / (grad_guess * sqrt(T)), resolved at run time.
  std::optional<double> fixed_eta;
  // MinibatchEG only: use the adaptive learning rate instead of a fixed one.
  bool adaptive_minibatch = false;

  bool is_adaptive() const {
    return family == SolverFamily::LocalAdaSEG ||
           (family == SolverFamily::MinibatchEG && adaptive_minibatch);
  }
  bool is_minibatch() const { return family == SolverFamily::MinibatchEG; }
  void validate() const;  // throws ConfigError
};

// Dispatches one local step of a per-worker baseline. MinibatchEG is not a
// per-worker rule and is rejected here; it needs the server-side batching
// below.
WorkerState baseline_step(const SolverKind& kind, WorkerState w,
                          const SaddleProblem& p, StepRecord* record = nullptr);

// Mean of samples_per_stream fresh oracle draws from every stream, taken in
// stream order.
Iterate averaged_oracle(const SaddleProblem& p, const Iterate& z,
                        std::span<RngStream> streams, int samples_per_stream);

// One extragradient step whose two oracle evaluations each average
// streams.size() * samples_per_stream fresh samples.
WorkerState minibatch_eg_step(WorkerState w, const SaddleProblem& p,
                              std::span<RngStream> streams,
                              int samples_per_stream, bool adapt_eta,
                              StepRecord* record = nullptr);

// Checks every per-step contract against a recorded step: eta monotone and
// consistent with its closed form, the probing move bounded by eta times
// the oracle norm, the correction move bounded by eta times ||g - M||, and
// both stored iterates feasible. Returns a description of the first
// violation, or nullopt when the step is clean.
std::optional<std::string> step_invariant_violation(
    const StepRecord& rec, const SaddleProblem& p, const AdaptiveState& params,
    bool adaptive);

}  // namespace lase
