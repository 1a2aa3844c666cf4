#include "lase/feasible_set.hpp"

#include <cmath>
#include <utility>

#include "lase/errors.hpp"

namespace lase {

FeasibleSet FeasibleSet::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  if (lower.size() != upper.size())
    throw ConfigError("box: lower/upper dimension mismatch");
  if (lower.size() == 0) throw ConfigError("box: empty dimension");
  if (!lower.allFinite() || !upper.allFinite())
    throw ConfigError("box: bounds must be finite (bounded domain required)");
  if ((lower.array() > upper.array()).any())
    throw ConfigError("box: requires lower <= upper componentwise");
  const Eigen::Index d = lower.size();
  return FeasibleSet(BoxData{std::move(lower), std::move(upper)}, d);
}

FeasibleSet FeasibleSet::symmetric_box(Eigen::Index dim, double half_width) {
  return box(Eigen::VectorXd::Constant(dim, -half_width),
             Eigen::VectorXd::Constant(dim, half_width));
}

FeasibleSet FeasibleSet::ball(Eigen::VectorXd center, double radius) {
  if (center.size() == 0) throw ConfigError("ball: empty dimension");
  if (!center.allFinite() || !std::isfinite(radius))
    throw ConfigError("ball: center and radius must be finite");
  if (radius <= 0.0) throw ConfigError("ball: requires radius > 0");
  const Eigen::Index d = center.size();
  return FeasibleSet(BallData{std::move(center), radius}, d);
}

FeasibleSet FeasibleSet::product(std::vector<FeasibleSet> parts) {
  if (parts.empty()) throw ConfigError("product: requires at least one part");
  Eigen::Index d = 0;
  for (const auto& p : parts) d += p.dim();
  return FeasibleSet(ProductData{std::move(parts)}, d);
}

Eigen::VectorXd FeasibleSet::project(const Eigen::VectorXd& v) const {
  if (v.size() != dim_)
    throw ConfigError("project: point dimension does not match the set");
  if (const auto* b = std::get_if<BoxData>(&kind_)) {
    return v.cwiseMax(b->lower).cwiseMin(b->upper);
  }
  if (const auto* s = std::get_if<BallData>(&kind_)) {
    const Eigen::VectorXd off = v - s->center;
    const double r = off.norm();
    if (r <= s->radius) return v;
    return s->center + off * (s->radius / r);
  }
  const auto& parts = std::get<ProductData>(kind_);
  Eigen::VectorXd out(dim_);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.segment(at, p.dim()) = p.project(v.segment(at, p.dim()));
    at += p.dim();
  }
  return out;
}

Iterate FeasibleSet::project(const Iterate& z) const {
  return Iterate::from_flat(project(z.flat()), z.dim_x());
}

bool FeasibleSet::contains(const Eigen::VectorXd& v, double tol) const {
  if (v.size() != dim_) return false;
  if (const auto* b = std::get_if<BoxData>(&kind_)) {
    return (v.array() >= b->lower.array() - tol).all() &&
           (v.array() <= b->upper.array() + tol).all();
  }
  if (const auto* s = std::get_if<BallData>(&kind_)) {
    return (v - s->center).norm() <= s->radius + tol;
  }
  const auto& parts = std::get<ProductData>(kind_);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    if (!p.contains(v.segment(at, p.dim()), tol)) return false;
    at += p.dim();
  }
  return true;
}

bool FeasibleSet::contains(const Iterate& z, double tol) const {
  return contains(z.flat(), tol);
}

double FeasibleSet::sup_squared_norm() const {
  if (const auto* b = std::get_if<BoxData>(&kind_)) {
    return b->lower.cwiseAbs().cwiseMax(b->upper.cwiseAbs()).squaredNorm();
  }
  if (const auto* s = std::get_if<BallData>(&kind_)) {
    const double reach = s->center.norm() + s->radius;
    return reach * reach;
  }
  // Product rule: the blockwise suprema are attained independently.
  const auto& parts = std::get<ProductData>(kind_);
  double total = 0.0;
  for (const auto& p : parts) total += p.sup_squared_norm();
  return total;
}

double FeasibleSet::diameter_bound() const {
  return std::sqrt(0.5 * sup_squared_norm());
}

}  // namespace lase
