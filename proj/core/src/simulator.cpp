#include "lase/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include "lase/errors.hpp"

namespace lase {

int Topology::max_local_steps() const {
  return *std::max_element(local_steps.begin(), local_steps.end());
}

std::int64_t Topology::planned_iterations() const {
  return static_cast<std::int64_t>(max_local_steps()) * rounds;
}

double Topology::resolve_alpha() const {
  const double m = static_cast<double>(workers);
  switch (alpha_mode) {
    case AlphaMode::Nonsmooth:
      return 1.0;
    case AlphaMode::Smooth:
      return 1.0 / std::sqrt(m);
    case AlphaMode::SmoothEps:
      return std::pow(static_cast<double>(planned_iterations()), eps) /
             std::sqrt(m);
  }
  throw ConfigError("topology: unknown alpha mode");
}

void Topology::validate() const {
  if (workers < 1) throw ConfigError("topology: M must be >= 1");
  if (rounds < 1) throw ConfigError("topology: R must be >= 1");
  if (local_steps.empty())
    throw ConfigError("topology: local step counts missing");
  if (local_steps.size() != 1 &&
      local_steps.size() != static_cast<std::size_t>(workers))
    throw ConfigError("topology: per_worker_K must list one count per worker");
  for (int k : local_steps)
    if (k < 1) throw ConfigError("topology: local step counts must be >= 1");
  if (alpha_mode == AlphaMode::SmoothEps && !(eps > 0.0 && eps < 0.5))
    throw ConfigError("topology: smooth-eps requires eps in (0, 1/2)");
  if (!(grad_guess > 0.0)) throw ConfigError("topology: G0 must be > 0");
  if (diameter_override && !(*diameter_override > 0.0))
    throw ConfigError("topology: diameter override must be > 0");
  if (solver.is_minibatch() && local_steps.size() != 1)
    throw ConfigError("topology: minibatch-eg does not take per-worker counts");
  solver.validate();
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

// Cumulative per-worker state after each local step of a round; enough to
// reconstruct the running average and the current aggregated iterate at any
// global iteration.
struct StepSnapshot {
  Iterate half_sum;
  Iterate full;
  double eta = 0.0;
  double v_acc = 0.0;
  std::int64_t samples = 0;
};

struct RunContext {
  const Topology& topo;
  const SaddleProblem& problem;
  const RunOptions& opts;
  bool adaptive = false;
  Clock::time_point start = Clock::now();
};

void throw_violation(const std::string& what, int round, int worker) {
  std::ostringstream os;
  os << "invariant violation (round " << round << ", worker " << worker
     << "): " << what;
  throw std::logic_error(os.str());
}

// Parallel-for over worker indices; identical results to the serial loop
// because workers share no mutable state.
template <typename Fn>
void for_each_worker(int workers, int threads, Fn&& body) {
  threads = std::min(std::max(threads, 1), workers);
  if (threads == 1) {
    for (int m = 0; m < workers; ++m) body(m);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int m = next.fetch_add(1); m < workers; m = next.fetch_add(1)) {
        try {
          body(m);
        } catch (...) {
          errors[static_cast<std::size_t>(m)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

// The residual column tracks the current aggregated iterate (the point the
// next communication would anchor at); the dual-gap column tracks the
// running averaged output, the quantity the convergence guarantees bound.
TrajectoryRow make_row(const RunContext& ctx, int round, std::int64_t iteration,
                       const Iterate& average, const Iterate& current,
                       double eta_min, double eta_max, double v_max,
                       std::int64_t samples) {
  TrajectoryRow row;
  row.round = round;
  row.iteration = iteration;
  row.residual = kkt_residual(ctx.problem, current);
  row.dual_gap = ctx.problem.duality_gap(average);
  row.eta_min = eta_min;
  row.eta_max = eta_max;
  row.v_max = v_max;
  row.samples = samples;
  row.wall_ms = elapsed_ms(ctx.start);
  return row;
}

double finish_gamma(double observed, double guess) {
  if (!(observed > 0.0)) return std::numeric_limits<double>::infinity();
  return std::max(observed / guess, guess / observed);
}

Trajectory run_minibatch(RunContext& ctx, AdaptiveState base) {
  const Topology& topo = ctx.topo;
  const int per_stream = topo.local_steps[0];
  std::vector<RngStream> streams;
  streams.reserve(static_cast<std::size_t>(topo.workers));
  for (int m = 0; m < topo.workers; ++m)
    streams.emplace_back(topo.master_seed, static_cast<std::uint64_t>(m));

  WorkerState server = WorkerState::init(
      ctx.problem, base, RngStream(topo.master_seed, stream_ids::aggregator));

  Trajectory out;
  out.initial_residual = kkt_residual(ctx.problem, server.anchor);
  out.last_anchor = server.anchor;

  for (int r = 1; r <= topo.rounds; ++r) {
    StepRecord rec;
    rec.round = r;
    const bool want_rec = ctx.opts.check_invariants || ctx.opts.step_sink;
    server = minibatch_eg_step(std::move(server), ctx.problem, streams,
                               per_stream, ctx.adaptive,
                               want_rec ? &rec : nullptr);
    if (ctx.opts.check_invariants) {
      if (auto v = step_invariant_violation(rec, ctx.problem, server.adaptive,
                                            ctx.adaptive))
        throw_violation(*v, r, -1);
    }
    if (ctx.opts.step_sink) ctx.opts.step_sink->push_back(rec);
    if (ctx.opts.round_sink)
      ctx.opts.round_sink->push_back(
          {r, {server.adaptive.eta}, {1.0}, {server.anchor}});

    const Iterate average = server.half_sum / static_cast<double>(r);
    out.rows.push_back(make_row(
        ctx, r, static_cast<std::int64_t>(r) * per_stream, average,
        server.last_full, server.adaptive.eta, server.adaptive.eta,
        std::sqrt(server.v_accumulator), server.oracle_samples));
  }

  out.final_output = server.half_sum / static_cast<double>(topo.rounds);
  out.final_full_average = server.full_sum / static_cast<double>(topo.rounds);
  out.last_anchor = server.anchor;
  out.gamma_observed = finish_gamma(server.max_oracle_norm, topo.grad_guess);
  out.v_over_sqrt_t = std::sqrt(server.v_accumulator) /
                      std::sqrt(static_cast<double>(topo.rounds));
  out.total_samples = server.oracle_samples;
  return out;
}

}  // namespace

Trajectory run(const Topology& topo, const SaddleProblem& problem,
               const RunOptions& opts) {
  topo.validate();
  if (problem.domain().dim() != problem.dim_x() + problem.dim_y())
    throw ConfigError("run: problem domain does not match its dimensions");

  RunContext ctx{topo, problem, opts};
  ctx.adaptive = topo.solver.is_adaptive();

  const double diameter =
      topo.diameter_override.value_or(problem.domain().diameter_bound());
  AdaptiveState base =
      AdaptiveState::init(diameter, topo.grad_guess, topo.resolve_alpha());
  if (!ctx.adaptive) {
    base.eta = topo.solver.fixed_eta.value_or(
        diameter /
        (topo.grad_guess *
         std::sqrt(static_cast<double>(topo.planned_iterations()))));
  }

  if (topo.solver.is_minibatch()) return run_minibatch(ctx, base);

  const int workers = topo.workers;
  const int max_k = topo.max_local_steps();
  const bool per_iteration = opts.record_every == RecordEvery::Iteration;
  const SolverFamily family = topo.solver.family;
  const bool weighted = family == SolverFamily::LocalAdaSEG;

  std::vector<WorkerState> ws;
  ws.reserve(static_cast<std::size_t>(workers));
  for (int m = 0; m < workers; ++m)
    ws.push_back(WorkerState::init(
        problem, base,
        RngStream(topo.master_seed, static_cast<std::uint64_t>(m))));

  Trajectory out;
  out.initial_residual = kkt_residual(problem, ws[0].anchor);

  // The solver's aggregation rule applied to the workers' current state;
  // at a round start this is exactly the communication anchor.
  const auto aggregate_current = [&ws, weighted]() {
    std::vector<WorkerReport> reports;
    reports.reserve(ws.size());
    for (const auto& w : ws) reports.push_back({w.adaptive.eta, w.last_full});
    return weighted ? server_aggregate(reports) : mean_aggregate(reports);
  };

  const bool want_records = opts.check_invariants || opts.step_sink != nullptr;
  std::vector<std::vector<StepRecord>> records(
      static_cast<std::size_t>(workers));
  std::vector<std::vector<StepSnapshot>> snapshots(
      static_cast<std::size_t>(workers));
  std::vector<std::int64_t> base_steps(static_cast<std::size_t>(workers), 0);

  for (int r = 1; r <= topo.rounds; ++r) {
    // Communication barrier: collect (eta, last full iterate), aggregate,
    // re-anchor every worker at the same point.
    std::vector<double> etas;
    etas.reserve(static_cast<std::size_t>(workers));
    for (const auto& w : ws) etas.push_back(w.adaptive.eta);
    const std::vector<double> weights =
        weighted ? aggregation_weights(etas)
                 : std::vector<double>(static_cast<std::size_t>(workers),
                                       1.0 / workers);
    const Iterate anchor = aggregate_current();
    for (auto& w : ws) w.anchor = anchor;
    out.last_anchor = anchor;

    if (opts.check_invariants) {
      double wsum = 0.0;
      for (double w : weights) {
        if (!(w > 0.0)) throw_violation("nonpositive aggregation weight", r, -1);
        wsum += w;
      }
      if (std::abs(wsum - 1.0) > 1e-12)
        throw_violation("aggregation weights do not sum to 1", r, -1);
      if (!problem.domain().contains(anchor, 1e-12))
        throw_violation("aggregated anchor left the feasible set", r, -1);
      for (const auto& w : ws)
        if (!bitwise_equal(w.anchor, anchor))
          throw_violation("post-communication anchors differ", r, -1);
    }
    if (opts.round_sink) {
      RoundCheck check;
      check.round = r;
      check.etas = etas;
      check.weights = weights;
      for (const auto& w : ws) check.anchors.push_back(w.anchor);
      opts.round_sink->push_back(std::move(check));
    }

    for (int m = 0; m < workers; ++m) {
      base_steps[static_cast<std::size_t>(m)] = ws[static_cast<std::size_t>(m)].steps;
      if (per_iteration) snapshots[static_cast<std::size_t>(m)].clear();
    }

    // Local phases; workers are independent until the next barrier.
    for_each_worker(workers, opts.threads, [&](int m) {
      auto& w = ws[static_cast<std::size_t>(m)];
      auto& recs = records[static_cast<std::size_t>(m)];
      auto& snaps = snapshots[static_cast<std::size_t>(m)];
      const int k_steps = topo.steps_for(m);
      for (int j = 0; j < k_steps; ++j) {
        StepRecord rec;
        rec.worker = m;
        rec.round = r;
        StepRecord* rp = want_records ? &rec : nullptr;
        switch (family) {
          case SolverFamily::LocalAdaSEG:
            w = extragradient_step(std::move(w), problem, true, rp);
            break;
          case SolverFamily::SEGDA:
          case SolverFamily::LocalSEGDA:
            w = extragradient_step(std::move(w), problem, false, rp);
            break;
          case SolverFamily::LocalSGDA:
            w = gda_step(std::move(w), problem, rp);
            break;
          case SolverFamily::MinibatchEG:
            break;  // handled in run_minibatch
        }
        if (opts.check_invariants) {
          if (auto v = step_invariant_violation(rec, problem, w.adaptive,
                                                ctx.adaptive))
            throw_violation(*v, r, m);
        }
        if (per_iteration)
          snaps.push_back({w.half_sum, w.last_full, w.adaptive.eta,
                           w.v_accumulator, w.oracle_samples});
        if (opts.step_sink) recs.push_back(std::move(rec));
      }
    });

    if (opts.step_sink)
      for (auto& recs : records) {
        for (auto& rec : recs) opts.step_sink->push_back(std::move(rec));
        recs.clear();
      }

    if (per_iteration) {
      for (int j = 1; j <= max_k; ++j) {
        Iterate grand = Iterate::Zero(problem.dim_x(), problem.dim_y());
        std::vector<WorkerReport> current;
        current.reserve(static_cast<std::size_t>(workers));
        std::int64_t count = 0;
        std::int64_t samples = 0;
        double eta_min = std::numeric_limits<double>::infinity();
        double eta_max = 0.0;
        double v_max = 0.0;
        for (int m = 0; m < workers; ++m) {
          const auto& snaps = snapshots[static_cast<std::size_t>(m)];
          const int at = std::min<int>(j, static_cast<int>(snaps.size())) - 1;
          const StepSnapshot& s = snaps[static_cast<std::size_t>(at)];
          grand += s.half_sum;
          current.push_back({s.eta, s.full});
          count = count + base_steps[static_cast<std::size_t>(m)] + (at + 1);
          samples += s.samples;
          eta_min = std::min(eta_min, s.eta);
          eta_max = std::max(eta_max, s.eta);
          v_max = std::max(v_max, std::sqrt(s.v_acc));
        }
        const Iterate cur = weighted ? server_aggregate(current)
                                     : mean_aggregate(current);
        out.rows.push_back(make_row(
            ctx, r, static_cast<std::int64_t>(r - 1) * max_k + j,
            grand / static_cast<double>(count), cur, eta_min, eta_max, v_max,
            samples));
      }
    } else {
      Iterate grand = Iterate::Zero(problem.dim_x(), problem.dim_y());
      std::int64_t count = 0;
      std::int64_t samples = 0;
      double eta_min = std::numeric_limits<double>::infinity();
      double eta_max = 0.0;
      double v_max = 0.0;
      for (const auto& w : ws) {
        grand += w.half_sum;
        count += w.steps;
        samples += w.oracle_samples;
        eta_min = std::min(eta_min, w.adaptive.eta);
        eta_max = std::max(eta_max, w.adaptive.eta);
        v_max = std::max(v_max, std::sqrt(w.v_accumulator));
      }
      out.rows.push_back(make_row(ctx, r,
                                  static_cast<std::int64_t>(r) * max_k,
                                  grand / static_cast<double>(count),
                                  aggregate_current(), eta_min, eta_max, v_max,
                                  samples));
    }
  }

  Iterate half_grand = Iterate::Zero(problem.dim_x(), problem.dim_y());
  Iterate full_grand = half_grand;
  std::int64_t count = 0;
  double max_norm = 0.0;
  double v_final = 0.0;
  for (const auto& w : ws) {
    half_grand += w.half_sum;
    full_grand += w.full_sum;
    count += w.steps;
    out.total_samples += w.oracle_samples;
    max_norm = std::max(max_norm, w.max_oracle_norm);
    v_final = std::max(v_final, std::sqrt(w.v_accumulator));
  }
  out.final_output = half_grand / static_cast<double>(count);
  out.final_full_average = full_grand / static_cast<double>(count);
  out.last_anchor = aggregate_current();
  out.gamma_observed = finish_gamma(max_norm, topo.grad_guess);
  out.v_over_sqrt_t =
      v_final / std::sqrt(static_cast<double>(topo.planned_iterations()));
  return out;
}

std::vector<Trajectory> sweep(std::span<const SweepJob> jobs, int threads) {
  std::vector<Trajectory> results(jobs.size());
  if (jobs.empty()) return results;
  if (threads <= 0)
    threads = static_cast<int>(
        std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min<int>(threads, static_cast<int>(jobs.size()));

  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto eat = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size();
         i = next.fetch_add(1)) {
      try {
        results[i] = run(jobs[i].topology, *jobs[i].problem, jobs[i].options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    eat();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(eat);
    for (auto& th : pool) th.join();
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
  return results;
}

}  // namespace lase
