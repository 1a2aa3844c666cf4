#include "lase/algorithms.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "lase/errors.hpp"

namespace lase {

AdaptiveState AdaptiveState::init(double diameter, double grad_guess,
                                  double base_lr) {
  if (!(diameter > 0.0) || !(grad_guess > 0.0) || !(base_lr > 0.0))
    throw ConfigError("adaptive state: diameter, G0 and alpha must be > 0");
  AdaptiveState s;
  s.diameter = diameter;
  s.grad_guess = grad_guess;
  s.base_lr = base_lr;
  s.accumulator = 0.0;
  s.eta = diameter * base_lr / grad_guess;
  return s;
}

AdaptiveState eta_update(AdaptiveState s, const Iterate& half,
                         const Iterate& anchor, const Iterate& full) {
  const double moved =
      (half - anchor).squared_norm() + (half - full).squared_norm();
  s.accumulator += moved / (5.0 * s.eta * s.eta);
  s.eta = s.diameter * s.base_lr /
          std::sqrt(s.grad_guess * s.grad_guess + s.accumulator);
  return s;
}

WorkerState WorkerState::init(const SaddleProblem& p, AdaptiveState adaptive,
                              RngStream stream) {
  const Iterate start = p.start_point();
  const Iterate zero = Iterate::Zero(p.dim_x(), p.dim_y());
  return WorkerState{.anchor = start,
                     .last_half = start,
                     .last_full = start,
                     .adaptive = adaptive,
                     .half_sum = zero,
                     .full_sum = zero,
                     .stream = std::move(stream)};
}

namespace {

void account_step(WorkerState& w, const Iterate& half, const Iterate& full,
                  double m_norm, double g_norm, int samples) {
  w.half_sum += half;
  w.full_sum += full;
  w.steps += 1;
  w.v_accumulator += g_norm * g_norm + m_norm * m_norm;
  w.max_oracle_norm = std::max({w.max_oracle_norm, m_norm, g_norm});
  w.oracle_samples += samples;
}

// OracleFn is called as oracle(z, state) so it can draw from the state's
// own stream after the move.
template <typename OracleFn>
WorkerState eg_step_impl(WorkerState w, const SaddleProblem& p,
                         OracleFn&& oracle, int samples_per_eval,
                         bool adapt_eta, StepRecord* record) {
  const double eta = w.adaptive.eta;
  const Iterate probe = oracle(w.anchor, w);
  const Iterate half = p.domain().project(w.anchor - eta * probe);
  const Iterate grad = oracle(half, w);
  const Iterate full = p.domain().project(w.anchor - eta * grad);

  account_step(w, half, full, probe.norm(), grad.norm(), 2 * samples_per_eval);

  const AdaptiveState before = w.adaptive;
  if (adapt_eta) w.adaptive = eta_update(w.adaptive, half, w.anchor, full);

  if (record) {
    record->eta = eta;
    record->m_norm = probe.norm();
    record->g_norm = grad.norm();
    record->gm_diff_norm = (grad - probe).norm();
    record->half_anchor_dist = distance(half, w.anchor);
    record->full_half_dist = distance(full, half);
    record->z_sq = w.adaptive.accumulator - before.accumulator;
    record->eta_after = w.adaptive.eta;
    record->accumulator_after = w.adaptive.accumulator;
    record->half = half;
    record->full = full;
  }

  w.last_half = half;
  w.last_full = full;
  w.anchor = full;
  return w;
}

}  // namespace

WorkerState extragradient_step(WorkerState w, const SaddleProblem& p,
                               bool adapt_eta, StepRecord* record) {
  return eg_step_impl(
      std::move(w), p,
      [&p](const Iterate& z, WorkerState& ws) { return p.oracle(z, ws.stream); },
      1, adapt_eta, record);
}

WorkerState local_phase(WorkerState w, const SaddleProblem& p, int steps,
                        bool adapt_eta, std::vector<StepRecord>* records) {
  if (steps < 1) throw ConfigError("local_phase: steps must be >= 1");
  for (int i = 0; i < steps; ++i) {
    StepRecord rec;
    w = extragradient_step(std::move(w), p, adapt_eta,
                           records ? &rec : nullptr);
    if (records) records->push_back(std::move(rec));
  }
  return w;
}

WorkerState gda_step(WorkerState w, const SaddleProblem& p,
                     StepRecord* record) {
  const double eta = w.adaptive.eta;
  const Iterate grad = p.oracle(w.anchor, w.stream);
  const Iterate next = p.domain().project(w.anchor - eta * grad);

  // Single oracle call; the one iterate plays both roles.
  w.half_sum += next;
  w.full_sum += next;
  w.steps += 1;
  w.v_accumulator += grad.squared_norm();
  w.max_oracle_norm = std::max(w.max_oracle_norm, grad.norm());
  w.oracle_samples += 1;

  if (record) {
    record->eta = eta;
    record->m_norm = grad.norm();
    record->g_norm = grad.norm();
    record->gm_diff_norm = 0.0;
    record->half_anchor_dist = distance(next, w.anchor);
    record->full_half_dist = 0.0;
    record->z_sq = 0.0;
    record->eta_after = eta;
    record->accumulator_after = w.adaptive.accumulator;
    record->half = next;
    record->full = next;
  }

  w.last_half = next;
  w.last_full = next;
  w.anchor = next;
  return w;
}

std::vector<double> aggregation_weights(std::span<const double> etas) {
  if (etas.empty()) throw UsageError("aggregation_weights: no reports");
  double inv_sum = 0.0;
  for (double eta : etas) {
    if (!(eta > 0.0))
      throw UsageError("aggregation_weights: learning rates must be > 0");
    inv_sum += 1.0 / eta;
  }
  std::vector<double> weights;
  weights.reserve(etas.size());
  for (double eta : etas) weights.push_back((1.0 / eta) / inv_sum);
  return weights;
}

namespace {

Iterate weighted_aggregate(std::span<const WorkerReport> reports,
                           std::span<const double> weights) {
  Iterate out = Iterate::Zero(reports.front().iterate.dim_x(),
                              reports.front().iterate.dim_y());
  for (std::size_t m = 0; m < reports.size(); ++m)
    out += weights[m] * reports[m].iterate;
  return out;
}

}  // namespace

Iterate server_aggregate(std::span<const WorkerReport> reports) {
  if (reports.empty()) throw UsageError("server_aggregate: no reports");
  std::vector<double> etas;
  etas.reserve(reports.size());
  for (const auto& r : reports) etas.push_back(r.eta);
  return weighted_aggregate(reports, aggregation_weights(etas));
}

Iterate mean_aggregate(std::span<const WorkerReport> reports) {
  if (reports.empty()) throw UsageError("mean_aggregate: no reports");
  const std::vector<double> weights(reports.size(),
                                    1.0 / static_cast<double>(reports.size()));
  return weighted_aggregate(reports, weights);
}

std::string to_string(SolverFamily f) {
  switch (f) {
    case SolverFamily::LocalAdaSEG: return "localadaseg";
    case SolverFamily::SEGDA: return "segda";
    case SolverFamily::MinibatchEG: return "minibatch-eg";
    case SolverFamily::LocalSGDA: return "local-sgda";
    case SolverFamily::LocalSEGDA: return "local-segda";
  }
  return "unknown";
}

std::optional<SolverFamily> solver_family_from_string(const std::string& s) {
  if (s == "localadaseg") return SolverFamily::LocalAdaSEG;
  if (s == "segda") return SolverFamily::SEGDA;
  if (s == "minibatch-eg") return SolverFamily::MinibatchEG;
  if (s == "local-sgda") return SolverFamily::LocalSGDA;
  if (s == "local-segda") return SolverFamily::LocalSEGDA;
  return std::nullopt;
}

void SolverKind::validate() const {
  if (family == SolverFamily::LocalAdaSEG && fixed_eta)
    throw ConfigError("solver: localadaseg does not take a fixed eta");
  if (adaptive_minibatch && family != SolverFamily::MinibatchEG)
    throw ConfigError("solver: adaptive flag applies to minibatch-eg only");
  if (adaptive_minibatch && fixed_eta)
    throw ConfigError("solver: adaptive minibatch-eg does not take a fixed eta");
  if (fixed_eta && !(*fixed_eta > 0.0))
    throw ConfigError("solver: fixed eta must be > 0");
}

WorkerState baseline_step(const SolverKind& kind, WorkerState w,
                          const SaddleProblem& p, StepRecord* record) {
  switch (kind.family) {
    case SolverFamily::LocalAdaSEG:
      return extragradient_step(std::move(w), p, true, record);
    case SolverFamily::SEGDA:
    case SolverFamily::LocalSEGDA:
      return extragradient_step(std::move(w), p, false, record);
    case SolverFamily::LocalSGDA:
      return gda_step(std::move(w), p, record);
    case SolverFamily::MinibatchEG:
      throw ConfigError("minibatch-eg requires server-side batching");
  }
  throw ConfigError("baseline_step: unknown solver kind");
}

Iterate averaged_oracle(const SaddleProblem& p, const Iterate& z,
                        std::span<RngStream> streams, int samples_per_stream) {
  if (streams.empty() || samples_per_stream < 1)
    throw ConfigError("averaged_oracle: needs streams and samples >= 1");
  Iterate sum = Iterate::Zero(p.dim_x(), p.dim_y());
  for (RngStream& stream : streams)
    for (int k = 0; k < samples_per_stream; ++k) sum += p.oracle(z, stream);
  return sum / (static_cast<double>(streams.size()) * samples_per_stream);
}

WorkerState minibatch_eg_step(WorkerState w, const SaddleProblem& p,
                              std::span<RngStream> streams,
                              int samples_per_stream, bool adapt_eta,
                              StepRecord* record) {
  const int batch = static_cast<int>(streams.size()) * samples_per_stream;
  return eg_step_impl(
      std::move(w), p,
      [&](const Iterate& z, WorkerState&) {
        return averaged_oracle(p, z, streams, samples_per_stream);
      },
      batch, adapt_eta, record);
}

std::optional<std::string> step_invariant_violation(
    const StepRecord& rec, const SaddleProblem& p, const AdaptiveState& params,
    bool adaptive) {
  const auto fail = [](const std::string& msg) {
    return std::optional<std::string>(msg);
  };
  const double slack = 1e-12 * std::max(1.0, rec.eta * rec.m_norm);
  if (rec.half_anchor_dist > rec.eta * rec.m_norm + slack) {
    std::ostringstream os;
    os << "probing move " << rec.half_anchor_dist << " exceeds eta*||M|| = "
       << rec.eta * rec.m_norm;
    return fail(os.str());
  }
  const double corr_slack = 1e-12 * std::max(1.0, rec.eta * rec.gm_diff_norm);
  if (rec.full_half_dist > rec.eta * rec.gm_diff_norm + corr_slack)
    return fail("correction move exceeds eta*||g - M||");
  if (rec.eta_after > rec.eta)
    return fail("learning rate increased");
  if (adaptive) {
    const double target = params.diameter * params.base_lr;
    const double closed =
        rec.eta_after * std::sqrt(params.grad_guess * params.grad_guess +
                                  rec.accumulator_after);
    if (std::abs(closed - target) > 1e-12 * std::max(1.0, target))
      return fail("eta closed form drifted from D*alpha");
  }
  if (!p.domain().contains(rec.half, 1e-12))
    return fail("half iterate left the feasible set");
  if (!p.domain().contains(rec.full, 1e-12))
    return fail("full iterate left the feasible set");
  return std::nullopt;
}

}  // namespace lase
