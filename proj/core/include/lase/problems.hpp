#pragma once

#include <limits>
#include <optional>

#include "lase/feasible_set.hpp"
#include "lase/iterate.hpp"
#include "lase/rng.hpp"

namespace lase {

// A convex-concave saddle problem seen through first-order information:
// the monotone operator g(z) = (d_x F, -d_y F) of the expected objective,
// plus an unbiased stochastic version of it. With noise disabled the oracle
// equals the deterministic operator exactly.
class SaddleProblem {
 public:
  virtual ~SaddleProblem() = default;

  virtual const FeasibleSet& domain() const = 0;
  virtual Eigen::Index dim_x() const = 0;
  virtual Eigen::Index dim_y() const = 0;

  // Deterministic operator value at z.
  virtual Iterate operator_at(const Iterate& z) const = 0;

  // One stochastic sample with E[oracle(z)] = operator_at(z).
  virtual Iterate oracle(const Iterate& z, RngStream& rng) const = 0;

  // A certified upper bound on the stochastic oracle norm, when one is
  // known. Diagnostics only; solvers never read it.
  virtual std::optional<double> gradient_bound_hint() const {
    return std::nullopt;
  }

  // Closed-form duality gap, when the problem admits one; NaN otherwise.
  virtual double duality_gap(const Iterate&) const {
    return std::numeric_limits<double>::quiet_NaN();
  }

  // Canonical start point: the projection of the origin onto the domain.
  Iterate start_point() const {
    return domain().project(Iterate::Zero(dim_x(), dim_y()));
  }
};

// Norm of the projected-step fixed-point violation,
// ||z - P(z - g(z))||; zero exactly at solutions of the constrained
// saddle problem.
double kkt_residual(const SaddleProblem& p, const Iterate& z);

}  // namespace lase
