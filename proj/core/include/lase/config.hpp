#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lase/bilinear.hpp"
#include "lase/simulator.hpp"

namespace lase {

// One experiment, as read from a JSON config document. Unknown keys are
// rejected; validation reports every problem at once, naming the offending
// key (e.g. "topology.M").
struct ExperimentConfig {
  struct Problem {
    int n = 10;
    double sigma = 0.1;
    std::uint64_t problem_seed = 2024;
    // When false, sigma is read as a variance and the oracle uses sqrt(sigma).
    bool noise_scale_is_std = true;

    bool operator==(const Problem&) const = default;
  };
  struct Solver {
    std::string kind = "localadaseg";
    double g0 = 1.0;
    std::string alpha_mode = "nonsmooth";
    double epsilon = 0.25;  // smooth-eps only
    std::optional<double> fixed_eta;
  };
  struct TopologySection {
    int workers = 4;                  // M
    std::vector<int> local_steps = {50};  // K, or per_worker_K when per_worker
    bool per_worker = false;
    int rounds = 40;  // R
    std::uint64_t master_seed = 1;
  };
  struct Output {
    std::string csv = "trajectory.csv";
    std::string record_every = "round";
    bool emit_problem = false;
    std::string label;  // defaults to the solver kind
  };

  Problem problem;
  Solver solver;
  TopologySection topology;
  Output output;

  // Parses and validates; throws ConfigError carrying either a syntax error
  // with a line number or the full list of semantic errors.
  static ExperimentConfig parse(const std::string& json_text);
  static ExperimentConfig parse_file(const std::string& path);

  // Complete echo with every default resolved; feeding it back reproduces
  // the run.
  std::string to_json() const;

  Topology to_topology() const;
  BilinearProblem make_problem() const;
  RecordEvery record_every_enum() const;
  std::string effective_label() const;
};

}  // namespace lase
