#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lase/config.hpp"
#include "lase/csv.hpp"

namespace lase {

struct RunArtifacts {
  std::filesystem::path csv;
  std::filesystem::path meta;
  std::filesystem::path problem_file;  // empty unless emit_problem was set
  Trajectory trajectory;
};

// Runs one configured experiment and writes the trajectory CSV plus a
// sidecar metadata file (config echo, observed gamma, final output vector).
// Relative output paths resolve against out_dir when given.
RunArtifacts run_experiment(const ExperimentConfig& config,
                            const std::filesystem::path& out_dir = {});

// Runs every config against the shared problem and writes one long-format
// CSV with a `solver` label column. All configs must share the problem
// section and carry distinct labels.
std::filesystem::path compare_experiments(
    const std::vector<ExperimentConfig>& configs,
    const std::filesystem::path& out_csv);

// A sweep axis: a dotted config key (e.g. "topology.K") and the values it
// takes. Axes combine as a cartesian grid.
struct SweepSpec {
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
};

// Expands the grid into labelled configs; labels join the varied
// assignments as "key=value;key=value".
std::vector<std::pair<std::string, ExperimentConfig>> expand_sweep(
    const ExperimentConfig& base, const SweepSpec& spec);

// Runs the whole grid (parallelized over grid points; results identical to
// serial execution) and writes one long-format CSV with a `run` column.
std::filesystem::path sweep_experiments(const ExperimentConfig& base,
                                        const SweepSpec& spec,
                                        const std::filesystem::path& out_csv,
                                        int threads = 0);

// One-command bundles pinning the bilinear benchmark regimes: local-step
// grids at both noise levels, the optimizer comparison, and the
// synchronous/asynchronous pairing.
std::filesystem::path replicate_fig2(const std::filesystem::path& out_dir,
                                     int seeds = 5, int threads = 0);
std::filesystem::path replicate_fig3(const std::filesystem::path& out_dir,
                                     int seeds = 5, int threads = 0);
std::filesystem::path replicate_async(const std::filesystem::path& out_dir,
                                      int seeds = 5, int threads = 0);

}  // namespace lase
