// lase — experiment runner for distributed adaptive extragradient solvers
// on stochastic bilinear saddle problems. Emits tidy CSV trajectories;
// plotting stays out of process.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lase/errors.hpp"
#include "lase/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::filesystem::path output_dir() {
  if (const char* dir = std::getenv("LASE_OUTPUT_DIR")) return dir;
  return {};
}

lase::SweepSpec parse_vary(const std::vector<std::string>& axes) {
  lase::SweepSpec spec;
  for (const std::string& axis : axes) {
    const auto eq = axis.find('=');
    if (eq == std::string::npos || eq == 0)
      throw lase::UsageError("--vary expects key=v1,v2,... got '" + axis + "'");
    std::vector<std::string> values;
    std::string value;
    std::istringstream vs(axis.substr(eq + 1));
    while (std::getline(vs, value, ',')) values.push_back(value);
    spec.axes.emplace_back(axis.substr(0, eq), std::move(values));
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed adaptive extragradient experiments on stochastic "
               "bilinear saddle problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> config_paths;
  std::vector<std::string> vary;
  std::string out_csv;
  int threads = 0;
  int seeds = 5;

  auto* cmd_run = app.add_subcommand("run", "Run one configured experiment");
  cmd_run->add_option("config", config_path, "JSON config file")->required();

  auto* cmd_sweep =
      app.add_subcommand("sweep", "Run a parameter grid off a base config");
  cmd_sweep->add_option("config", config_path, "JSON config file")->required();
  cmd_sweep->add_option("--vary", vary, "Axis key=v1,v2,... (repeatable)")
      ->required();
  cmd_sweep->add_option("--out", out_csv, "Combined CSV path");
  cmd_sweep->add_option("--threads", threads, "Worker threads (0 = auto)");

  auto* cmd_compare =
      app.add_subcommand("compare", "Run several configs on one problem");
  cmd_compare->add_option("configs", config_paths, "JSON config files")
      ->required()
      ->expected(-2);
  cmd_compare->add_option("--out", out_csv, "Combined CSV path");

  auto* cmd_fig2 = app.add_subcommand(
      "replicate-fig2", "Local-step grid at both noise levels");
  cmd_fig2->add_option("--seeds", seeds, "Seeds per grid point");
  cmd_fig2->add_option("--threads", threads, "Worker threads (0 = auto)");

  auto* cmd_fig3 =
      app.add_subcommand("replicate-fig3", "Optimizer comparison bundle");
  cmd_fig3->add_option("--seeds", seeds, "Seeds per grid point");
  cmd_fig3->add_option("--threads", threads, "Worker threads (0 = auto)");

  auto* cmd_async = app.add_subcommand(
      "replicate-async", "Synchronous vs per-worker local-step schedules");
  cmd_async->add_option("--seeds", seeds, "Seeds per grid point");
  cmd_async->add_option("--threads", threads, "Worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::filesystem::path out_dir = output_dir();
  try {
    if (cmd_run->parsed()) {
      const auto cfg = lase::ExperimentConfig::parse_file(config_path);
      const auto artifacts = lase::run_experiment(cfg, out_dir);
      std::cout << "wrote " << artifacts.csv.string() << " and "
                << artifacts.meta.string() << '\n';
    } else if (cmd_sweep->parsed()) {
      const auto cfg = lase::ExperimentConfig::parse_file(config_path);
      const auto spec = parse_vary(vary);
      const std::filesystem::path csv_path =
          out_csv.empty()
              ? (out_dir.empty() ? "sweep.csv" : out_dir / "sweep.csv")
              : std::filesystem::path(out_csv);
      const auto csv = lase::sweep_experiments(cfg, spec, csv_path, threads);
      std::cout << "wrote " << csv.string() << '\n';
    } else if (cmd_compare->parsed()) {
      std::vector<lase::ExperimentConfig> cfgs;
      cfgs.reserve(config_paths.size());
      for (const auto& path : config_paths)
        cfgs.push_back(lase::ExperimentConfig::parse_file(path));
      const std::filesystem::path csv =
          out_csv.empty() ? (out_dir.empty() ? "compare.csv"
                                             : out_dir / "compare.csv")
                          : std::filesystem::path(out_csv);
      std::cout << "wrote " << lase::compare_experiments(cfgs, csv).string()
                << '\n';
    } else if (cmd_fig2->parsed()) {
      std::cout << "wrote "
                << lase::replicate_fig2(out_dir, seeds, threads).string()
                << '\n';
    } else if (cmd_fig3->parsed()) {
      std::cout << "wrote "
                << lase::replicate_fig3(out_dir, seeds, threads).string()
                << '\n';
    } else if (cmd_async->parsed()) {
      std::cout << "wrote "
                << lase::replicate_async(out_dir, seeds, threads).string()
                << '\n';
    }
  } catch (const lase::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lase::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
