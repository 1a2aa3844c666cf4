#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "lase/problems.hpp"

namespace lase {

// The stochastic bilinear game over the box [-1, 1]^n x [-1, 1]^n:
//
//   F(x, y) = E[ x'Ay + (b + xi)'x + (c + xi)'y ],  xi ~ N(0, sigma^2 I).
//
// The deterministic operator is (Ay + b, -(A'x + c)); the stochastic oracle
// draws one xi per call and perturbs both blocks with it, preserving the
// correlation written into the objective.
class BilinearProblem final : public SaddleProblem {
 public:
  BilinearProblem(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd c,
                  double sigma);

  // b, c uniform on [-1, 1]^n; a random symmetric matrix with entries
  // uniform on [-1, 1], rescaled by 1 / max(|b|_inf, |c|_inf). Degenerate
  // draws with a vanishing scale are redrawn.
  static BilinearProblem generate(Eigen::Index n, double sigma,
                                  RngStream& rng);

  // Applies the generator's normalization rule to explicit inputs.
  static BilinearProblem normalized(Eigen::MatrixXd a_raw, Eigen::VectorXd b,
                                    Eigen::VectorXd c, double sigma);

  Eigen::Index n() const { return b_.size(); }
  const Eigen::MatrixXd& A() const { return a_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::VectorXd& c() const { return c_; }
  double sigma() const { return sigma_; }
  std::optional<std::uint64_t> generator_seed() const {
    return generator_seed_;
  }

  const FeasibleSet& domain() const override { return domain_; }
  Eigen::Index dim_x() const override { return n(); }
  Eigen::Index dim_y() const override { return n(); }
  Iterate operator_at(const Iterate& z) const override;
  Iterate oracle(const Iterate& z, RngStream& rng) const override;
  std::optional<double> gradient_bound_hint() const override;

  // Exact duality gap of the expected objective,
  //   b'x + ||A'x + c||_1 - c'y + ||Ay + b||_1,
  // valid because F is linear in each block over the box. Requires a
  // feasible point.
  double duality_gap(const Iterate& z) const override;

  // Versioned text form: n, sigma, A row-major, b, c, generator seed.
  std::string to_json() const;
  static BilinearProblem from_json(const std::string& text);

 private:
  void check_shape(const Iterate& z) const;

  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  Eigen::VectorXd c_;
  double sigma_ = 0.0;
  std::optional<std::uint64_t> generator_seed_;
  FeasibleSet domain_;
};

// Mean iterate z_bar of the sequence, the scaled gap T * gap(z_bar), and the
// closed-form supremum of the linearized regret over the box,
//   sum_t <z_t, g(z_t)> + ||sum_t g(z_t)||_1.
// The gap never exceeds the regret supremum (up to 1e-9 slack in tests).
struct GapRegretBound {
  double gap;
  double regret_sup;
};
GapRegretBound regret_bound_check(const BilinearProblem& p,
                                  std::span<const Iterate> iterates);

}  // namespace lase
