#include "lase/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lase {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer; full avalanche on 64 bits.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id,
                     std::uint64_t counter)
    : master_seed_(master_seed), stream_id_(stream_id), counter_(counter) {
  key_ = mix64(mix64(master_seed + kGolden) ^
               (stream_id + 0xC4CEB9FE1A85EC53ULL));
}

std::uint64_t RngStream::next_word() {
  return mix64(key_ ^ (counter_++ * kGolden + kGolden));
}

double RngStream::uniform() {
  // Top 53 bits -> [0, 1) on the double grid.
  return static_cast<double>(next_word() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + uniform() * (hi - lo);
}

Eigen::VectorXd RngStream::uniform_vector(Eigen::Index len, double lo,
                                          double hi) {
  Eigen::VectorXd v(len);
  for (Eigen::Index i = 0; i < len; ++i) v[i] = uniform(lo, hi);
  return v;
}

double RngStream::gaussian(double std) {
  if (std < 0.0) throw std::invalid_argument("gaussian: std must be >= 0");
  // Box-Muller; u1 in (0, 1] keeps the log finite.
  const double u1 =
      (static_cast<double>(next_word() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(next_word() >> 11) * 0x1.0p-53;
  return std * std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::VectorXd RngStream::gaussian_vector(Eigen::Index len, double std) {
  Eigen::VectorXd v(len);
  for (Eigen::Index i = 0; i < len; ++i) v[i] = gaussian(std);
  return v;
}

}  // namespace lase
