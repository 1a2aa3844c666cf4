#include "lase/problems.hpp"

namespace lase {

double kkt_residual(const SaddleProblem& p, const Iterate& z) {
  const Iterate stepped = p.domain().project(z - p.operator_at(z));
  return distance(z, stepped);
}

}  // namespace lase
