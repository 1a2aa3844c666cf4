#include "lase/experiment.hpp"

#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lase/errors.hpp"

namespace lase {

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& path,
                              const std::filesystem::path& out_dir) {
  if (path.is_absolute() || out_dir.empty()) return path;
  return out_dir / path;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

json vector_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.begin(), v.end()));
}

void write_meta(const std::filesystem::path& path,
                const ExperimentConfig& config, const Trajectory& t) {
  json meta;
  meta["config"] = json::parse(config.to_json());
  meta["label"] = config.effective_label();
  meta["gamma_observed"] = t.gamma_observed;
  meta["initial_residual"] = t.initial_residual;
  meta["final_residual"] = t.rows.empty() ? 0.0 : t.rows.back().residual;
  meta["v_over_sqrt_t"] = t.v_over_sqrt_t;
  meta["total_samples"] = t.total_samples;
  meta["final_output"] = {{"x", vector_json(t.final_output.x)},
                          {"y", vector_json(t.final_output.y)}};
  auto os = open_out(path);
  os << meta.dump(2) << '\n';
}

// Applies "value" (parsed as JSON when possible, else as a string) at a
// dotted key path, then revalidates the whole document.
ExperimentConfig with_assignment(const ExperimentConfig& base,
                                 const std::string& dotted,
                                 const std::string& value) {
  json root = json::parse(base.to_json());
  json* at = &root;
  std::string token;
  std::istringstream path(dotted);
  std::vector<std::string> parts;
  while (std::getline(path, token, '.')) parts.push_back(token);
  if (parts.empty()) throw UsageError("sweep: empty key");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i)
    at = &((*at)[parts[i]]);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  // K and per_worker_K are mutually exclusive in a document; replace.
  if (parts.size() == 2 && parts[0] == "topology" && parts[1] == "K")
    at->erase("per_worker_K");
  if (parts.size() == 2 && parts[0] == "topology" && parts[1] == "per_worker_K")
    at->erase("K");
  (*at)[parts.back()] = parsed;
  return ExperimentConfig::parse(root.dump());
}

struct LabelledJob {
  std::string label;
  ExperimentConfig config;
};

std::filesystem::path run_labelled(const std::vector<LabelledJob>& jobs,
                                   const std::filesystem::path& out_csv,
                                   const std::string& label_column,
                                   int threads) {
  std::vector<SweepJob> sim_jobs;
  sim_jobs.reserve(jobs.size());
  for (const auto& job : jobs) {
    SweepJob sj;
    sj.problem =
        std::make_shared<BilinearProblem>(job.config.make_problem());
    sj.topology = job.config.to_topology();
    sj.options.record_every = job.config.record_every_enum();
    sim_jobs.push_back(std::move(sj));
  }
  const std::vector<Trajectory> results = sweep(sim_jobs, threads);

  std::vector<std::pair<std::string, const Trajectory*>> labelled;
  labelled.reserve(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i)
    labelled.emplace_back(jobs[i].label, &results[i]);
  auto os = open_out(out_csv);
  write_labelled_csv(os, label_column, labelled);
  return out_csv;
}

ExperimentConfig bilinear_base() {
  ExperimentConfig cfg;  // defaults: n = 10, sigma = 0.1, M = 4, K = 50
  return cfg;
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& config,
                            const std::filesystem::path& out_dir) {
  RunArtifacts artifacts;
  artifacts.csv = resolve(config.output.csv, out_dir);

  const BilinearProblem problem = config.make_problem();
  RunOptions options;
  options.record_every = config.record_every_enum();
  artifacts.trajectory = run(config.to_topology(), problem, options);

  {
    auto os = open_out(artifacts.csv);
    write_trajectory_csv(os, artifacts.trajectory);
  }
  artifacts.meta = artifacts.csv;
  artifacts.meta += ".meta.json";
  write_meta(artifacts.meta, config, artifacts.trajectory);

  if (config.output.emit_problem) {
    artifacts.problem_file = artifacts.csv;
    artifacts.problem_file += ".problem.json";
    auto os = open_out(artifacts.problem_file);
    os << problem.to_json() << '\n';
  }
  return artifacts;
}

std::filesystem::path compare_experiments(
    const std::vector<ExperimentConfig>& configs,
    const std::filesystem::path& out_csv) {
  if (configs.size() < 2)
    throw UsageError("compare: needs at least two configs");
  std::set<std::string> labels;
  for (const auto& cfg : configs) {
    if (!(cfg.problem == configs.front().problem))
      throw UsageError("compare: configs must share the problem section");
    if (!labels.insert(cfg.effective_label()).second)
      throw UsageError("compare: duplicate label '" + cfg.effective_label() +
                       "'");
  }
  std::vector<LabelledJob> jobs;
  jobs.reserve(configs.size());
  for (const auto& cfg : configs) jobs.push_back({cfg.effective_label(), cfg});
  return run_labelled(jobs, out_csv, "solver", 1);
}

std::vector<std::pair<std::string, ExperimentConfig>> expand_sweep(
    const ExperimentConfig& base, const SweepSpec& spec) {
  if (spec.axes.empty()) throw UsageError("sweep: empty grid");
  for (const auto& [key, values] : spec.axes)
    if (values.empty()) throw UsageError("sweep: axis '" + key + "' is empty");

  std::vector<std::pair<std::string, ExperimentConfig>> grid = {{"", base}};
  for (const auto& [key, values] : spec.axes) {
    std::vector<std::pair<std::string, ExperimentConfig>> next;
    next.reserve(grid.size() * values.size());
    for (const auto& [label, cfg] : grid)
      for (const auto& value : values) {
        const std::string assignment = key + "=" + value;
        next.emplace_back(label.empty() ? assignment
                                        : label + ";" + assignment,
                          with_assignment(cfg, key, value));
      }
    grid = std::move(next);
  }
  return grid;
}

std::filesystem::path sweep_experiments(const ExperimentConfig& base,
                                        const SweepSpec& spec,
                                        const std::filesystem::path& out_csv,
                                        int threads) {
  std::vector<LabelledJob> jobs;
  for (auto& [label, cfg] : expand_sweep(base, spec))
    jobs.push_back({label, cfg});
  return run_labelled(jobs, out_csv, "run", threads);
}

std::filesystem::path replicate_fig2(const std::filesystem::path& out_dir,
                                     int seeds, int threads) {
  // Local-step grid at fixed iteration budget T = 2500 and both noise
  // levels; every K divides T so R = T / K.
  constexpr int kBudget = 2500;
  std::vector<LabelledJob> jobs;
  for (double sigma : {0.1, 0.5})
    for (int k : {1, 5, 10, 50, 100, 250, 500})
      for (int seed = 1; seed <= seeds; ++seed) {
        ExperimentConfig cfg = bilinear_base();
        cfg.problem.sigma = sigma;
        cfg.topology.local_steps = {k};
        cfg.topology.rounds = kBudget / k;
        cfg.topology.master_seed = static_cast<std::uint64_t>(seed);
        std::ostringstream label;
        label << "sigma=" << sigma << ";K=" << k << ";seed=" << seed;
        jobs.push_back({label.str(), cfg});
      }
  return run_labelled(jobs, resolve("replicate_fig2.csv", out_dir), "run",
                      threads);
}

std::filesystem::path replicate_fig3(const std::filesystem::path& out_dir,
                                     int seeds, int threads) {
  // Optimizer comparison at K = 50, T = 2500. The non-adaptive baselines
  // run with the default step scale D / (G0 sqrt(T)); minibatch-eg and
  // minibatch-eg-adaptive are simplified stand-ins for the minibatch
  // optimizers.
  constexpr int kBudget = 2500;
  constexpr int kLocal = 50;
  const std::vector<std::string> kinds = {"localadaseg", "minibatch-eg",
                                          "minibatch-eg-adaptive",
                                          "local-segda", "local-sgda"};
  std::vector<LabelledJob> jobs;
  for (double sigma : {0.1, 0.5})
    for (const auto& kind : kinds)
      for (int seed = 1; seed <= seeds; ++seed) {
        ExperimentConfig cfg = bilinear_base();
        cfg.problem.sigma = sigma;
        cfg.solver.kind = kind;
        cfg.topology.local_steps = {kLocal};
        cfg.topology.rounds = kBudget / kLocal;
        cfg.topology.master_seed = static_cast<std::uint64_t>(seed);
        std::ostringstream label;
        label << "solver=" << kind << ";sigma=" << sigma << ";seed=" << seed;
        jobs.push_back({label.str(), cfg});
      }
  return run_labelled(jobs, resolve("replicate_fig3.csv", out_dir), "run",
                      threads);
}

std::filesystem::path replicate_async(const std::filesystem::path& out_dir,
                                      int seeds, int threads) {
  // Synchronous runs against per-worker local-step schedules; round
  // barriers stay in place, workers just do different amounts of work.
  struct Regime {
    const char* name;
    int sync_k;
    std::vector<int> async_k;
  };
  const std::vector<Regime> regimes = {{"k50", 50, {50, 45, 40, 35}},
                                       {"k100", 100, {100, 90, 80, 70}}};
  std::vector<LabelledJob> jobs;
  for (const auto& regime : regimes)
    for (int seed = 1; seed <= seeds; ++seed) {
      ExperimentConfig sync = bilinear_base();
      sync.topology.local_steps = {regime.sync_k};
      sync.topology.master_seed = static_cast<std::uint64_t>(seed);
      std::ostringstream sync_label;
      sync_label << "mode=sync;regime=" << regime.name << ";seed=" << seed;
      jobs.push_back({sync_label.str(), sync});

      ExperimentConfig async_cfg = sync;
      async_cfg.topology.local_steps = regime.async_k;
      async_cfg.topology.per_worker = true;
      std::ostringstream async_label;
      async_label << "mode=async;regime=" << regime.name << ";seed=" << seed;
      jobs.push_back({async_label.str(), async_cfg});
    }
  return run_labelled(jobs, resolve("replicate_async.csv", out_dir), "run",
                      threads);
}

}  // namespace lase
