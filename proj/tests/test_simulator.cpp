#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "lase/bilinear.hpp"
#include "lase/errors.hpp"
#include "lase/simulator.hpp"

using namespace lase;

namespace {

BilinearProblem make_problem(Eigen::Index n, double sigma,
                             std::uint64_t seed = 42) {
  RngStream gen(seed, stream_ids::problem_generator);
  return BilinearProblem::generate(n, sigma, gen);
}

Topology base_topology() {
  Topology t;
  t.workers = 4;
  t.rounds = 10;
  t.local_steps = {20};
  t.master_seed = 3;
  return t;
}

bool rows_equal_modulo_wall(const Trajectory& a, const Trajectory& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& ra = a.rows[i];
    const auto& rb = b.rows[i];
    if (ra.round != rb.round || ra.iteration != rb.iteration ||
        ra.residual != rb.residual || ra.dual_gap != rb.dual_gap ||
        ra.eta_min != rb.eta_min || ra.eta_max != rb.eta_max ||
        ra.v_max != rb.v_max || ra.samples != rb.samples)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("topology validation") {
  Topology t = base_topology();
  t.workers = 0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = base_topology();
  t.local_steps = {20, 20};  // neither 1 nor M entries
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = base_topology();
  t.alpha_mode = AlphaMode::SmoothEps;
  t.eps = 0.7;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = base_topology();
  t.solver.family = SolverFamily::MinibatchEG;
  t.local_steps = {10, 10, 10, 10};
  CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("alpha regimes") {
  Topology t = base_topology();
  CHECK(t.resolve_alpha() == 1.0);
  t.alpha_mode = AlphaMode::Smooth;
  CHECK(t.resolve_alpha() == doctest::Approx(0.5).epsilon(1e-15));  // 1/sqrt(4)
  t.alpha_mode = AlphaMode::SmoothEps;
  t.eps = 0.25;
  // T = 200, alpha = 200^0.25 / 2.
  CHECK(t.resolve_alpha() ==
        doctest::Approx(std::pow(200.0, 0.25) / 2.0).epsilon(1e-12));
}

TEST_CASE("degenerate topology reduces to the serial solver") {
  const auto p = make_problem(4, 0.2);
  Topology t = base_topology();
  t.workers = 1;
  t.local_steps = {1};
  t.rounds = 30;
  const Trajectory traj = run(t, p);

  // Manual serial loop with the same stream and parameters.
  AdaptiveState a = AdaptiveState::init(p.domain().diameter_bound(),
                                        t.grad_guess, 1.0);
  WorkerState w = WorkerState::init(p, a, RngStream(t.master_seed, 0));
  w = local_phase(std::move(w), p, 30);
  const Iterate avg = w.half_sum / 30.0;
  CHECK(bitwise_equal(traj.final_output, avg));
  CHECK(traj.rows.size() == 30);
  CHECK(traj.total_samples == 60);
}

TEST_CASE("round bookkeeping and sample accounting") {
  const auto p = make_problem(6, 0.1);
  Topology t = base_topology();
  std::vector<RoundCheck> rounds;
  RunOptions opts;
  opts.round_sink = &rounds;
  const Trajectory traj = run(t, p, opts);

  CHECK(traj.rows.size() == 10);
  // Communications happen exactly once per round.
  REQUIRE(rounds.size() == 10);
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    CHECK(rounds[r].round == static_cast<int>(r) + 1);
    REQUIRE(rounds[r].anchors.size() == 4);
    double sum = 0.0;
    for (double w : rounds[r].weights) sum += w;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    // Post-communication anchors are bitwise identical across workers.
    for (const auto& anchor : rounds[r].anchors)
      CHECK(bitwise_equal(anchor, rounds[r].anchors.front()));
  }
  // 2 M K R oracle calls in a synchronous run.
  CHECK(traj.total_samples == 2LL * 4 * 20 * 10);
  CHECK(traj.rows.back().samples == traj.total_samples);

  // Rows carry strictly increasing rounds, nonnegative metrics, and a
  // nondecreasing v_max.
  for (std::size_t i = 1; i < traj.rows.size(); ++i) {
    CHECK(traj.rows[i].round > traj.rows[i - 1].round);
    CHECK(traj.rows[i].v_max >= traj.rows[i - 1].v_max);
    CHECK(traj.rows[i].residual >= 0.0);
    CHECK(traj.rows[i].dual_gap >= 0.0);
  }
  CHECK(traj.rows.back().residual < traj.rows.front().residual);
  CHECK(std::isfinite(traj.v_over_sqrt_t));
  CHECK(traj.gamma_observed >= 1.0);
}

TEST_CASE("per-iteration recording subsumes round rows") {
  const auto p = make_problem(4, 0.1);
  Topology t = base_topology();
  t.rounds = 3;
  t.local_steps = {5};
  RunOptions by_round;
  RunOptions by_iter;
  by_iter.record_every = RecordEvery::Iteration;
  const Trajectory coarse = run(t, p, by_round);
  const Trajectory fine = run(t, p, by_iter);
  REQUIRE(fine.rows.size() == 15);
  REQUIRE(coarse.rows.size() == 3);
  for (int r = 1; r <= 3; ++r) {
    const auto& round_row = coarse.rows[static_cast<std::size_t>(r - 1)];
    const auto& last_iter_row = fine.rows[static_cast<std::size_t>(r * 5 - 1)];
    CHECK(round_row.iteration == last_iter_row.iteration);
    CHECK(round_row.residual == last_iter_row.residual);
    CHECK(round_row.dual_gap == last_iter_row.dual_gap);
    CHECK(round_row.samples == last_iter_row.samples);
  }
  CHECK(bitwise_equal(coarse.final_output, fine.final_output));
}

TEST_CASE("per-iteration recording handles uneven worker schedules") {
  const auto p = make_problem(4, 0.1);
  Topology t = base_topology();
  t.rounds = 2;
  t.local_steps = {4, 3, 2, 1};
  RunOptions opts;
  opts.record_every = RecordEvery::Iteration;
  const Trajectory traj = run(t, p, opts);
  // One row per local-step index up to the largest count, per round.
  REQUIRE(traj.rows.size() == 8);
  CHECK(traj.rows.back().iteration == 8);
  // Finished workers stop contributing samples mid-round.
  CHECK(traj.rows[0].samples == 2 * 4);       // all four stepped once
  CHECK(traj.rows[3].samples == 2 * (4 + 3 + 2 + 1));
  CHECK(traj.total_samples == 2LL * 2 * (4 + 3 + 2 + 1));
}

TEST_CASE("worker threads do not change the trajectory") {
  const auto p = make_problem(6, 0.3);
  Topology t = base_topology();
  RunOptions serial;
  serial.threads = 1;
  RunOptions parallel;
  parallel.threads = 4;
  const Trajectory a = run(t, p, serial);
  const Trajectory b = run(t, p, parallel);
  CHECK(rows_equal_modulo_wall(a, b));
  CHECK(bitwise_equal(a.final_output, b.final_output));
}

TEST_CASE("identical runs are bitwise identical") {
  const auto p = make_problem(6, 0.3);
  Topology t = base_topology();
  const Trajectory a = run(t, p);
  const Trajectory b = run(t, p);
  CHECK(rows_equal_modulo_wall(a, b));
  CHECK(bitwise_equal(a.final_output, b.final_output));
  CHECK(a.gamma_observed == b.gamma_observed);
}

TEST_CASE("asynchronous schedules converge under the round barrier") {
  const auto p = make_problem(10, 0.1);
  Topology t = base_topology();
  t.rounds = 40;
  t.local_steps = {50, 45, 40, 35};
  std::vector<RoundCheck> rounds;
  RunOptions opts;
  opts.round_sink = &rounds;
  const Trajectory traj = run(t, p, opts);
  CHECK(traj.rows.size() == 40);
  CHECK(traj.rows.back().residual < 0.1 * traj.initial_residual);
  // Sample accounting: 2 R sum_m K_m.
  CHECK(traj.total_samples == 2LL * 40 * (50 + 45 + 40 + 35));
  for (const auto& check : rounds)
    for (const auto& anchor : check.anchors)
      CHECK(bitwise_equal(anchor, check.anchors.front()));
}

TEST_CASE("baseline solvers run under the same scheduler") {
  const auto p = make_problem(4, 0.2);
  Topology t = base_topology();
  t.rounds = 5;
  t.local_steps = {10};

  SUBCASE("local segda consumes two samples per step") {
    t.solver.family = SolverFamily::LocalSEGDA;
    const Trajectory traj = run(t, p);
    CHECK(traj.total_samples == 2LL * 4 * 10 * 5);
    CHECK(traj.rows.back().eta_min == traj.rows.back().eta_max);
  }

  SUBCASE("local sgda consumes one sample per step") {
    t.solver.family = SolverFamily::LocalSGDA;
    const Trajectory traj = run(t, p);
    CHECK(traj.total_samples == 1LL * 4 * 10 * 5);
  }

  SUBCASE("minibatch eg pools worker samples per server step") {
    t.solver.family = SolverFamily::MinibatchEG;
    const Trajectory traj = run(t, p);
    CHECK(traj.total_samples == 2LL * 4 * 10 * 5);
    CHECK(traj.rows.size() == 5);
    CHECK(traj.rows.back().iteration == 50);
  }

  SUBCASE("adaptive minibatch eg adapts its rate") {
    t.solver.family = SolverFamily::MinibatchEG;
    t.solver.adaptive_minibatch = true;
    const Trajectory traj = run(t, p);
    CHECK(traj.rows.back().eta_min < traj.rows.front().eta_min);
  }
}

TEST_CASE("eta columns are nonincreasing for the adaptive solver") {
  const auto p = make_problem(6, 0.2);
  Topology t = base_topology();
  const Trajectory traj = run(t, p);
  for (std::size_t i = 1; i < traj.rows.size(); ++i) {
    CHECK(traj.rows[i].eta_max <= traj.rows[i - 1].eta_max);
    CHECK(traj.rows[i].eta_min <= traj.rows[i - 1].eta_min);
  }
}

TEST_CASE("sweep runs a grid deterministically") {
  auto problem = std::make_shared<BilinearProblem>(make_problem(4, 0.2));
  std::vector<SweepJob> jobs;
  for (int k : {1, 5, 10})
    for (std::uint64_t seed : {1, 2, 3}) {
      SweepJob job;
      job.problem = problem;
      job.topology = base_topology();
      job.topology.local_steps = {k};
      job.topology.rounds = 50 / k;
      job.topology.master_seed = seed;
      jobs.push_back(std::move(job));
    }
  const auto serial = sweep(jobs, 1);
  const auto parallel = sweep(jobs, 4);
  REQUIRE(serial.size() == 9);
  REQUIRE(parallel.size() == 9);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(rows_equal_modulo_wall(serial[i], parallel[i]));
    CHECK(bitwise_equal(serial[i].final_output, parallel[i].final_output));
  }
}

TEST_CASE("diameter override feeds the learning rate") {
  const auto p = make_problem(4, 0.0);
  Topology t = base_topology();
  t.rounds = 1;
  t.local_steps = {1};
  t.diameter_override = 10.0;
  const Trajectory traj = run(t, p);
  // eta_1 = D alpha / G0 with the overridden D, then one update.
  CHECK(traj.rows[0].eta_max <= 10.0);
  Topology plain = t;
  plain.diameter_override.reset();
  const Trajectory ref = run(plain, p);
  CHECK(traj.rows[0].eta_max != ref.rows[0].eta_max);
}
