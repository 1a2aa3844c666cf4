#include "lase/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lase/errors.hpp"

namespace lase {

namespace {

using nlohmann::json;

int line_of_offset(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

// Collects semantic errors so a bad config reports everything at once.
struct Validator {
  std::vector<std::string> errors;

  void fail(const std::string& key, const std::string& what) {
    errors.push_back(key + ": " + what);
  }

  const json* section(const json& root, const char* name) {
    if (!root.contains(name)) return nullptr;
    if (!root[name].is_object()) {
      fail(name, "must be an object");
      return nullptr;
    }
    return &root[name];
  }

  void reject_unknown(const json& obj, const std::string& prefix,
                      std::initializer_list<const char*> known) {
    for (const auto& [key, _] : obj.items()) {
      bool found = false;
      for (const char* k : known)
        if (key == k) {
          found = true;
          break;
        }
      if (!found) fail(prefix + "." + key, "unknown key");
    }
  }

  template <typename T>
  void read(const json& obj, const std::string& prefix, const char* key,
            T& out) {
    if (!obj.contains(key)) return;
    try {
      out = obj[key].get<T>();
    } catch (const json::exception&) {
      fail(prefix + "." + key, "wrong type");
    }
  }
};

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << "syntax error at line " << line_of_offset(text, e.byte) << ": "
       << e.what();
    throw ConfigError(os.str());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");

  ExperimentConfig cfg;
  Validator v;
  v.reject_unknown(root, "config", {"problem", "solver", "topology", "output"});

  if (const json* p = v.section(root, "problem")) {
    v.reject_unknown(*p, "problem",
                     {"n", "sigma", "problem_seed", "noise_scale_is_std"});
    v.read(*p, "problem", "n", cfg.problem.n);
    v.read(*p, "problem", "sigma", cfg.problem.sigma);
    v.read(*p, "problem", "problem_seed", cfg.problem.problem_seed);
    v.read(*p, "problem", "noise_scale_is_std", cfg.problem.noise_scale_is_std);
  }
  if (const json* s = v.section(root, "solver")) {
    v.reject_unknown(*s, "solver",
                     {"kind", "G0", "alpha_mode", "epsilon", "fixed_eta"});
    v.read(*s, "solver", "kind", cfg.solver.kind);
    v.read(*s, "solver", "G0", cfg.solver.g0);
    v.read(*s, "solver", "alpha_mode", cfg.solver.alpha_mode);
    v.read(*s, "solver", "epsilon", cfg.solver.epsilon);
    if (s->contains("fixed_eta") && !(*s)["fixed_eta"].is_null()) {
      double eta = 0.0;
      v.read(*s, "solver", "fixed_eta", eta);
      cfg.solver.fixed_eta = eta;
    }
  }
  if (const json* t = v.section(root, "topology")) {
    v.reject_unknown(*t, "topology",
                     {"M", "K", "per_worker_K", "R", "master_seed"});
    v.read(*t, "topology", "M", cfg.topology.workers);
    v.read(*t, "topology", "R", cfg.topology.rounds);
    v.read(*t, "topology", "master_seed", cfg.topology.master_seed);
    const bool has_k = t->contains("K");
    const bool has_pwk = t->contains("per_worker_K");
    if (has_k && has_pwk)
      v.fail("topology.per_worker_K", "mutually exclusive with topology.K");
    if (has_k) {
      int k = 0;
      v.read(*t, "topology", "K", k);
      cfg.topology.local_steps = {k};
      cfg.topology.per_worker = false;
    } else if (has_pwk) {
      std::vector<int> counts;
      v.read(*t, "topology", "per_worker_K", counts);
      cfg.topology.local_steps = std::move(counts);
      cfg.topology.per_worker = true;
    }
  }
  if (const json* o = v.section(root, "output")) {
    v.reject_unknown(*o, "output",
                     {"csv", "record_every", "emit_problem", "label"});
    v.read(*o, "output", "csv", cfg.output.csv);
    v.read(*o, "output", "record_every", cfg.output.record_every);
    v.read(*o, "output", "emit_problem", cfg.output.emit_problem);
    v.read(*o, "output", "label", cfg.output.label);
  }

  // Semantic checks, all collected.
  if (cfg.problem.n < 1) v.fail("problem.n", "must be >= 1");
  if (!(cfg.problem.sigma >= 0.0) || !std::isfinite(cfg.problem.sigma))
    v.fail("problem.sigma", "must be finite and >= 0");
  if (cfg.topology.workers < 1) v.fail("topology.M", "must be >= 1");
  if (cfg.topology.rounds < 1) v.fail("topology.R", "must be >= 1");
  if (cfg.topology.per_worker &&
      cfg.topology.local_steps.size() !=
          static_cast<std::size_t>(cfg.topology.workers))
    v.fail("topology.per_worker_K",
           "must list exactly one count per worker (length M)");
  for (int k : cfg.topology.local_steps)
    if (k < 1) {
      v.fail(cfg.topology.per_worker ? "topology.per_worker_K" : "topology.K",
             "counts must be >= 1");
      break;
    }
  if (!(cfg.solver.g0 > 0.0)) v.fail("solver.G0", "must be > 0");

  const auto family = solver_family_from_string(
      cfg.solver.kind == "minibatch-eg-adaptive" ? "minibatch-eg"
                                                 : cfg.solver.kind);
  if (!family)
    v.fail("solver.kind",
           "must be one of localadaseg, segda, minibatch-eg, "
           "minibatch-eg-adaptive, local-sgda, local-segda");
  if (cfg.solver.alpha_mode != "nonsmooth" && cfg.solver.alpha_mode != "smooth" &&
      cfg.solver.alpha_mode != "smooth-eps")
    v.fail("solver.alpha_mode", "must be nonsmooth, smooth or smooth-eps");
  if (cfg.solver.alpha_mode == "smooth-eps" &&
      !(cfg.solver.epsilon > 0.0 && cfg.solver.epsilon < 0.5))
    v.fail("solver.epsilon", "must lie in (0, 1/2)");
  if (cfg.solver.fixed_eta && !(*cfg.solver.fixed_eta > 0.0))
    v.fail("solver.fixed_eta", "must be > 0");
  if (cfg.solver.fixed_eta &&
      (cfg.solver.kind == "localadaseg" ||
       cfg.solver.kind == "minibatch-eg-adaptive"))
    v.fail("solver.fixed_eta", "adaptive solvers do not take a fixed eta");
  if (family && *family == SolverFamily::MinibatchEG && cfg.topology.per_worker)
    v.fail("topology.per_worker_K", "minibatch-eg does not take per-worker counts");
  if (cfg.output.record_every != "round" && cfg.output.record_every != "iteration")
    v.fail("output.record_every", "must be round or iteration");
  if (cfg.output.csv.empty()) v.fail("output.csv", "must not be empty");
  if (cfg.output.label.find(',') != std::string::npos)
    v.fail("output.label", "must not contain commas (used as a CSV field)");

  if (!v.errors.empty()) {
    std::ostringstream os;
    os << "invalid config (" << v.errors.size() << " error"
       << (v.errors.size() == 1 ? "" : "s") << "):";
    for (const auto& e : v.errors) os << "\n  - " << e;
    throw ConfigError(os.str());
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::to_json() const {
  json root;
  root["problem"] = {{"n", problem.n},
                     {"sigma", problem.sigma},
                     {"problem_seed", problem.problem_seed},
                     {"noise_scale_is_std", problem.noise_scale_is_std}};
  root["solver"] = {{"kind", solver.kind},
                    {"G0", solver.g0},
                    {"alpha_mode", solver.alpha_mode},
                    {"epsilon", solver.epsilon}};
  if (solver.fixed_eta) root["solver"]["fixed_eta"] = *solver.fixed_eta;
  root["topology"] = {{"M", topology.workers},
                      {"R", topology.rounds},
                      {"master_seed", topology.master_seed}};
  if (topology.per_worker)
    root["topology"]["per_worker_K"] = topology.local_steps;
  else
    root["topology"]["K"] = topology.local_steps.at(0);
  root["output"] = {{"csv", output.csv},
                    {"record_every", output.record_every},
                    {"emit_problem", output.emit_problem}};
  if (!output.label.empty()) root["output"]["label"] = output.label;
  return root.dump(2);
}

Topology ExperimentConfig::to_topology() const {
  Topology t;
  t.workers = topology.workers;
  t.rounds = topology.rounds;
  t.local_steps = topology.local_steps;
  t.master_seed = topology.master_seed;
  t.grad_guess = solver.g0;
  if (solver.alpha_mode == "nonsmooth")
    t.alpha_mode = AlphaMode::Nonsmooth;
  else if (solver.alpha_mode == "smooth")
    t.alpha_mode = AlphaMode::Smooth;
  else
    t.alpha_mode = AlphaMode::SmoothEps;
  t.eps = solver.epsilon;
  t.solver.family = *solver_family_from_string(
      solver.kind == "minibatch-eg-adaptive" ? "minibatch-eg" : solver.kind);
  t.solver.fixed_eta = solver.fixed_eta;
  t.solver.adaptive_minibatch = solver.kind == "minibatch-eg-adaptive";
  return t;
}

BilinearProblem ExperimentConfig::make_problem() const {
  RngStream stream(problem.problem_seed, stream_ids::problem_generator);
  const double std =
      problem.noise_scale_is_std ? problem.sigma : std::sqrt(problem.sigma);
  return BilinearProblem::generate(problem.n, std, stream);
}

RecordEvery ExperimentConfig::record_every_enum() const {
  return output.record_every == "iteration" ? RecordEvery::Iteration
                                            : RecordEvery::Round;
}

std::string ExperimentConfig::effective_label() const {
  return output.label.empty() ? solver.kind : output.label;
}

}  // namespace lase
