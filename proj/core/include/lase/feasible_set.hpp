#pragma once

#include <Eigen/Core>
#include <variant>
#include <vector>

#include "lase/iterate.hpp"

namespace lase {

// A projectable compact convex domain: an axis-aligned box, a Euclidean
// ball, or a product of such sets over consecutive coordinate blocks.
// Owns the domain radius D, the smallest value with
// sup_z (1/2)||z||^2 <= D^2.
class FeasibleSet {
 public:
  static FeasibleSet box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  // The box [-half_width, half_width]^dim.
  static FeasibleSet symmetric_box(Eigen::Index dim, double half_width = 1.0);
  static FeasibleSet ball(Eigen::VectorXd center, double radius);
  static FeasibleSet product(std::vector<FeasibleSet> parts);

  Eigen::Index dim() const { return dim_; }

  // Euclidean-nearest point of the set; idempotent and nonexpansive.
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;
  Iterate project(const Iterate& z) const;

  bool contains(const Eigen::VectorXd& v, double tol = 0.0) const;
  bool contains(const Iterate& z, double tol = 0.0) const;

  double sup_squared_norm() const;
  double diameter_bound() const;

 private:
  struct BoxData {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
  };
  struct BallData {
    Eigen::VectorXd center;
    double radius;
  };
  using ProductData = std::vector<FeasibleSet>;

  FeasibleSet(std::variant<BoxData, BallData, ProductData> kind,
              Eigen::Index dim)
      : kind_(std::move(kind)), dim_(dim) {}

  std::variant<BoxData, BallData, ProductData> kind_;
  Eigen::Index dim_ = 0;
};

}  // namespace lase
