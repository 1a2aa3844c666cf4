#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lase/bilinear.hpp"
#include "lase/errors.hpp"

using namespace lase;

namespace {

Eigen::VectorXd scalar(double v) {
  Eigen::VectorXd out(1);
  out << v;
  return out;
}

Iterate point1(double x, double y) { return {scalar(x), scalar(y)}; }

// F(x, y) = x * y over [-1, 1]^2.
BilinearProblem xy_game(double sigma = 0.0) {
  return BilinearProblem(Eigen::MatrixXd::Identity(1, 1), scalar(0.0),
                         scalar(0.0), sigma);
}

// Exhaustive max over the 2^n box vertices; valid because the objective is
// linear in each block.
double brute_force_gap(const BilinearProblem& p, const Iterate& z) {
  const Eigen::Index n = p.n();
  double best_y = -std::numeric_limits<double>::infinity();
  double best_x = std::numeric_limits<double>::infinity();
  for (std::int64_t mask = 0; mask < (std::int64_t{1} << n); ++mask) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
      v(i) = (mask >> i) & 1 ? 1.0 : -1.0;
    const double f_y = z.x.dot(p.A() * v) + p.b().dot(z.x) + p.c().dot(v);
    const double f_x = v.dot(p.A() * z.y) + p.b().dot(v) + p.c().dot(z.y);
    best_y = std::max(best_y, f_y);
    best_x = std::min(best_x, f_x);
  }
  return best_y - best_x;
}

Iterate random_feasible(const BilinearProblem& p, RngStream& rng) {
  return {rng.uniform_vector(p.n(), -1.0, 1.0),
          rng.uniform_vector(p.n(), -1.0, 1.0)};
}

}  // namespace

TEST_CASE("generator produces a symmetric normalized instance") {
  RngStream rng(42, stream_ids::problem_generator);
  const auto p = BilinearProblem::generate(10, 0.1, rng);
  CHECK(p.n() == 10);
  CHECK(p.b().size() == 10);
  CHECK(p.c().size() == 10);
  CHECK(p.A() == p.A().transpose());
  CHECK((p.b().array().abs() <= 1.0).all());
  CHECK((p.c().array().abs() <= 1.0).all());
  CHECK(p.generator_seed() == 42);

  // Reproducible from the stream.
  RngStream rng2(42, stream_ids::problem_generator);
  const auto q = BilinearProblem::generate(10, 0.1, rng2);
  CHECK(p.A() == q.A());
  CHECK(p.b() == q.b());
  CHECK(p.c() == q.c());
}

TEST_CASE("normalization rule divides by the larger offset magnitude") {
  Eigen::VectorXd b(2), c(2);
  b << 0.8, -0.1;
  c << 0.5, 0.2;
  Eigen::MatrixXd raw(2, 2);
  raw << 0.4, 0.0, 0.0, 0.4;
  const auto p = BilinearProblem::normalized(raw, b, c, 0.0);
  CHECK(p.A()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

  // Degenerate offsets cannot be normalized.
  CHECK_THROWS_AS(BilinearProblem::normalized(raw, Eigen::VectorXd::Zero(2),
                                              Eigen::VectorXd::Zero(2), 0.0),
                  ConfigError);
}

TEST_CASE("noiseless oracle equals the deterministic operator") {
  const auto p = xy_game();
  RngStream rng(1, 0);
  const Iterate z = point1(1.0, 1.0);
  const Iterate g = p.oracle(z, rng);
  CHECK(g.x(0) == 1.0);
  CHECK(g.y(0) == -1.0);
  const Iterate det = p.operator_at(z);
  CHECK(g.x == det.x);
  CHECK(g.y == det.y);
}

TEST_CASE("oracle is unbiased") {
  RngStream gen(3, stream_ids::problem_generator);
  const auto p = BilinearProblem::generate(10, 0.1, gen);
  RngStream rng(17, 0);
  const Iterate z = random_feasible(p, rng);
  const Iterate det = p.operator_at(z);
  Iterate sum = Iterate::Zero(10, 10);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) sum += p.oracle(z, rng);
  const Iterate mean = sum / static_cast<double>(draws);
  const double tol = 3.0 * 0.1 / std::sqrt(static_cast<double>(draws));
  CHECK((mean.x - det.x).cwiseAbs().maxCoeff() < tol);
  CHECK((mean.y - det.y).cwiseAbs().maxCoeff() < tol);
}

TEST_CASE("oracle noise is shared by both blocks") {
  RngStream gen(3, stream_ids::problem_generator);
  const auto p = BilinearProblem::generate(4, 0.5, gen);
  RngStream rng(8, 0);
  const Iterate z = random_feasible(p, rng);
  const Iterate det = p.operator_at(z);
  const Iterate g = p.oracle(z, rng);
  // x block adds xi, y block subtracts the same xi.
  const Eigen::VectorXd xi_x = g.x - det.x;
  const Eigen::VectorXd xi_y = -(g.y - det.y);
  CHECK((xi_x - xi_y).norm() < 1e-14);
}

TEST_CASE("kkt residual") {
  const auto p = xy_game();
  CHECK(kkt_residual(p, point1(0.0, 0.0)) == 0.0);
  // x term: |1 - clamp(1 - 1)| = 1; y term: |1 - clamp(1 + 1)| = 0.
  CHECK(kkt_residual(p, point1(1.0, 1.0)) == doctest::Approx(1.0));
  RngStream rng(5, 0);
  for (int i = 0; i < 50; ++i)
    CHECK(kkt_residual(p, random_feasible(p, rng)) >= 0.0);
}

TEST_CASE("duality gap closed form") {
  const auto p = xy_game();
  CHECK(p.duality_gap(point1(0.0, 0.0)) == 0.0);
  CHECK(p.duality_gap(point1(1.0, 1.0)) == doctest::Approx(2.0));
  CHECK_THROWS_AS(p.duality_gap(point1(2.0, 0.0)), std::domain_error);
}

TEST_CASE("duality gap matches vertex enumeration") {
  RngStream rng(12, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 1 + trial % 4;
    RngStream gen(100 + trial, stream_ids::problem_generator);
    const auto p = BilinearProblem::generate(n, 0.0, gen);
    const Iterate z = random_feasible(p, rng);
    CHECK(p.duality_gap(z) ==
          doctest::Approx(brute_force_gap(p, z)).epsilon(1e-10));
  }
}

TEST_CASE("residual and gap vanish together at the unique saddle") {
  // n = 1: F = a x y + b x + c y has its saddle at x* = -c/a, y* = -b/a.
  RngStream rng(21, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = rng.uniform(0.5, 2.0);
    const double b = rng.uniform(-0.4, 0.4);
    const double c = rng.uniform(-0.4, 0.4);
    const BilinearProblem p(Eigen::MatrixXd::Constant(1, 1, a), scalar(b),
                            scalar(c), 0.0);
    const Iterate saddle = point1(-c / a, -b / a);
    CHECK(kkt_residual(p, saddle) < 1e-12);
    CHECK(p.duality_gap(saddle) < 1e-12);
    // Away from the saddle both metrics are strictly positive.
    for (double dx : {-0.3, 0.3})
      for (double dy : {-0.3, 0.3}) {
        const Iterate z = point1(-c / a + dx, -b / a + dy);
        if (!p.domain().contains(z)) continue;
        CHECK(kkt_residual(p, z) > 1e-9);
        CHECK(p.duality_gap(z) > 1e-9);
      }
  }
}

TEST_CASE("oracle variance matches 2 n sigma^2") {
  RngStream gen(9, stream_ids::problem_generator);
  const double sigma = 0.5;
  const Eigen::Index n = 6;
  const auto p = BilinearProblem::generate(n, sigma, gen);
  RngStream rng(33, 0);
  const Iterate z = random_feasible(p, rng);
  const Iterate det = p.operator_at(z);
  const int draws = 100000;
  double acc = 0.0;
  for (int i = 0; i < draws; ++i)
    acc += (p.oracle(z, rng) - det).squared_norm();
  const double expected = 2.0 * static_cast<double>(n) * sigma * sigma;
  // Var(2 ||xi||^2) = 8 n sigma^4; 4-sigma band on the empirical mean.
  const double tol = 4.0 * std::sqrt(8.0 * static_cast<double>(n) / draws) *
                     sigma * sigma;
  CHECK(std::abs(acc / draws - expected) < tol);
}

TEST_CASE("gradient bound hint certifies the oracle") {
  RngStream gen(4, stream_ids::problem_generator);
  const auto p = BilinearProblem::generate(8, 0.3, gen);
  const double bound = *p.gradient_bound_hint();
  RngStream rng(6, 0);
  for (int i = 0; i < 2000; ++i) {
    const Iterate z = random_feasible(p, rng);
    CHECK(p.oracle(z, rng).norm() <= bound);
  }
}

TEST_CASE("regret bound") {
  const auto p = xy_game();

  SUBCASE("single iterate at the saddle") {
    const std::vector<Iterate> seq = {point1(0.0, 0.0)};
    const auto r = regret_bound_check(p, seq);
    CHECK(r.gap == 0.0);
    CHECK(r.gap <= r.regret_sup);
  }

  SUBCASE("corner iterate is tight") {
    const std::vector<Iterate> seq = {point1(1.0, 1.0)};
    const auto r = regret_bound_check(p, seq);
    CHECK(r.gap == doctest::Approx(2.0));
    CHECK(r.regret_sup == doctest::Approx(2.0));
    CHECK(r.gap <= r.regret_sup + 1e-9);
  }

  SUBCASE("random trajectories on random instances") {
    for (int trial = 0; trial < 40; ++trial) {
      RngStream gen(500 + trial, stream_ids::problem_generator);
      const auto q = BilinearProblem::generate(1 + trial % 5, 0.0, gen);
      RngStream rng(trial, 0);
      std::vector<Iterate> seq;
      const int len = 1 + static_cast<int>(rng.next_word() % 25);
      for (int t = 0; t < len; ++t) seq.push_back(random_feasible(q, rng));
      const auto r = regret_bound_check(q, seq);
      CHECK(r.gap <= r.regret_sup + 1e-9);
    }
  }

  SUBCASE("empty sequence is a usage error") {
    CHECK_THROWS_AS(regret_bound_check(p, {}), UsageError);
  }
}

TEST_CASE("serialization round-trips exactly") {
  RngStream gen(77, stream_ids::problem_generator);
  const auto p = BilinearProblem::generate(5, 0.25, gen);
  const auto q = BilinearProblem::from_json(p.to_json());
  CHECK(p.A() == q.A());
  CHECK(p.b() == q.b());
  CHECK(p.c() == q.c());
  CHECK(p.sigma() == q.sigma());
  CHECK(q.generator_seed() == p.generator_seed());

  CHECK_THROWS_AS(BilinearProblem::from_json("{\"format\": \"other\"}"),
                  ConfigError);
  CHECK_THROWS_AS(BilinearProblem::from_json("not json"), ConfigError);
}
