#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace lase {

// Reserved stream ids. Worker oracle streams use the worker index directly,
// so reserved ids live far away from any plausible worker count.
namespace stream_ids {
inline constexpr std::uint64_t problem_generator = 1ULL << 62;
inline constexpr std::uint64_t aggregator = (1ULL << 62) + 1;
}  // namespace stream_ids

// Counter-based random stream. Every output word is a pure function of
// (master_seed, stream_id, counter): streams can be replayed from any
// counter position and are insensitive to scheduling order, which is what
// makes worker-parallel runs bit-reproducible. Distinct stream ids give
// statistically independent sequences.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id,
            std::uint64_t counter = 0);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }
  void seek(std::uint64_t counter) { counter_ = counter; }

  // Next raw word; advances the counter by one.
  std::uint64_t next_word();

  // Uniform on [0, 1); one word.
  double uniform();
  // Uniform on [lo, hi); one word.
  double uniform(double lo, double hi);
  Eigen::VectorXd uniform_vector(Eigen::Index len, double lo, double hi);

  // One zero-mean Gaussian with standard deviation `std`; consumes exactly
  // two words, so a draw at counter c is reproducible independent of the
  // surrounding call pattern.
  double gaussian(double std = 1.0);
  Eigen::VectorXd gaussian_vector(Eigen::Index len, double std);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t counter_;
  std::uint64_t key_;
};

}  // namespace lase
