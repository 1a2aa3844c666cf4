#include "lase/bilinear.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lase/errors.hpp"

namespace lase {

namespace {

constexpr const char* kFormatTag = "lase.bilinear.v1";
constexpr double kDegenerateScale = 1e-12;

FeasibleSet make_domain(Eigen::Index n) {
  std::vector<FeasibleSet> parts;
  parts.push_back(FeasibleSet::symmetric_box(n));
  parts.push_back(FeasibleSet::symmetric_box(n));
  return FeasibleSet::product(std::move(parts));
}

Eigen::MatrixXd symmetric_uniform(Eigen::Index n, RngStream& rng) {
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = rng.uniform(-1.0, 1.0);
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

}  // namespace

BilinearProblem::BilinearProblem(Eigen::MatrixXd a, Eigen::VectorXd b,
                                 Eigen::VectorXd c, double sigma)
    : a_(std::move(a)),
      b_(std::move(b)),
      c_(std::move(c)),
      sigma_(sigma),
      domain_(make_domain(b_.size())) {
  if (a_.rows() != a_.cols() || a_.rows() != b_.size() ||
      b_.size() != c_.size() || b_.size() < 1)
    throw ConfigError("bilinear: A must be n x n matching b and c, n >= 1");
  if (sigma_ < 0.0 || !std::isfinite(sigma_))
    throw ConfigError("bilinear: sigma must be finite and >= 0");
}

BilinearProblem BilinearProblem::normalized(Eigen::MatrixXd a_raw,
                                            Eigen::VectorXd b,
                                            Eigen::VectorXd c, double sigma) {
  const double scale =
      std::max(b.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff());
  if (scale < kDegenerateScale)
    throw ConfigError("bilinear: degenerate b, c (normalization underflow)");
  return BilinearProblem(a_raw / scale, std::move(b), std::move(c), sigma);
}

BilinearProblem BilinearProblem::generate(Eigen::Index n, double sigma,
                                          RngStream& rng) {
  if (n < 1) throw ConfigError("bilinear: n must be >= 1");
  Eigen::VectorXd b = rng.uniform_vector(n, -1.0, 1.0);
  Eigen::VectorXd c = rng.uniform_vector(n, -1.0, 1.0);
  while (std::max(b.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff()) <
         kDegenerateScale) {
    b = rng.uniform_vector(n, -1.0, 1.0);
    c = rng.uniform_vector(n, -1.0, 1.0);
  }
  auto p = normalized(symmetric_uniform(n, rng), std::move(b), std::move(c),
                      sigma);
  p.generator_seed_ = rng.master_seed();
  return p;
}

void BilinearProblem::check_shape(const Iterate& z) const {
  if (z.dim_x() != n() || z.dim_y() != n())
    throw ConfigError("bilinear: iterate dimensions do not match the problem");
}

Iterate BilinearProblem::operator_at(const Iterate& z) const {
  check_shape(z);
  return {a_ * z.y + b_, -(a_.transpose() * z.x + c_)};
}

Iterate BilinearProblem::oracle(const Iterate& z, RngStream& rng) const {
  check_shape(z);
  // One shared draw per call perturbs both blocks.
  const Eigen::VectorXd xi = rng.gaussian_vector(n(), sigma_);
  return {a_ * z.y + b_ + xi, -(a_.transpose() * z.x + c_ + xi)};
}

std::optional<double> BilinearProblem::gradient_bound_hint() const {
  // Loose certified bound per block: ||Ay|| <= sqrt(n) * max row sum,
  // ||b|| <= sqrt(n) |b|_inf, plus a 3-sigma allowance for the noise; the
  // sqrt(2) joins the two blocks. Covers both blocks by taking the larger
  // of |b|_inf and |c|_inf.
  const double root_n = std::sqrt(static_cast<double>(n()));
  const double row_max = a_.cwiseAbs().rowwise().sum().maxCoeff();
  const double offset_max =
      std::max(b_.cwiseAbs().maxCoeff(), c_.cwiseAbs().maxCoeff());
  return std::sqrt(2.0) *
         (row_max * root_n + offset_max * root_n + 3.0 * sigma_ * root_n);
}

double BilinearProblem::duality_gap(const Iterate& z) const {
  check_shape(z);
  if (!domain_.contains(z, 1e-9))
    throw std::domain_error("duality_gap: point is outside the box");
  const double best_y = b_.dot(z.x) + (a_.transpose() * z.x + c_).lpNorm<1>();
  const double best_x = -(a_ * z.y + b_).lpNorm<1>() + c_.dot(z.y);
  return best_y - best_x;
}

GapRegretBound regret_bound_check(const BilinearProblem& p,
                                  std::span<const Iterate> iterates) {
  if (iterates.empty())
    throw UsageError("regret_bound_check: empty iterate sequence");
  Iterate mean = Iterate::Zero(p.dim_x(), p.dim_y());
  Iterate op_sum = Iterate::Zero(p.dim_x(), p.dim_y());
  double inner_sum = 0.0;
  for (const Iterate& z : iterates) {
    const Iterate g = p.operator_at(z);
    inner_sum += dot(z, g);
    op_sum += g;
    mean += z;
  }
  const double count = static_cast<double>(iterates.size());
  mean *= 1.0 / count;
  const double regret_sup =
      inner_sum + op_sum.x.lpNorm<1>() + op_sum.y.lpNorm<1>();
  return {count * p.duality_gap(mean), regret_sup};
}

std::string BilinearProblem::to_json() const {
  nlohmann::json j;
  j["format"] = kFormatTag;
  j["n"] = n();
  j["sigma"] = sigma_;
  std::vector<double> a_flat;
  a_flat.reserve(static_cast<std::size_t>(n()) * n());
  for (Eigen::Index i = 0; i < n(); ++i)
    for (Eigen::Index k = 0; k < n(); ++k) a_flat.push_back(a_(i, k));
  j["a"] = a_flat;
  j["b"] = std::vector<double>(b_.begin(), b_.end());
  j["c"] = std::vector<double>(c_.begin(), c_.end());
  if (generator_seed_) j["generator_seed"] = *generator_seed_;
  return j.dump(2);
}

BilinearProblem BilinearProblem::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("problem file: ") + e.what());
  }
  if (!j.contains("format") || j["format"] != kFormatTag)
    throw ConfigError("problem file: unknown or missing format tag");
  const auto n = j.at("n").get<Eigen::Index>();
  const auto a_flat = j.at("a").get<std::vector<double>>();
  const auto b_vals = j.at("b").get<std::vector<double>>();
  const auto c_vals = j.at("c").get<std::vector<double>>();
  if (n < 1 || a_flat.size() != static_cast<std::size_t>(n) * n ||
      b_vals.size() != static_cast<std::size_t>(n) ||
      c_vals.size() != static_cast<std::size_t>(n))
    throw ConfigError("problem file: inconsistent shapes");
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      a(i, k) = a_flat[static_cast<std::size_t>(i) * n + k];
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(b_vals.data(), n);
  Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(c_vals.data(), n);
  BilinearProblem p(std::move(a), std::move(b), std::move(c),
                    j.at("sigma").get<double>());
  if (j.contains("generator_seed"))
    p.generator_seed_ = j["generator_seed"].get<std::uint64_t>();
  return p;
}

}  // namespace lase
