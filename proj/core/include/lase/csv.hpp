#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lase/simulator.hpp"

namespace lase {

// Shortest decimal form that round-trips the exact double (17 significant
// digits).
std::string format_double(double v);

inline constexpr const char* kTrajectoryHeader =
    "round,iteration,residual,dualgap,eta_min,eta_max,v_max,samples,wall_ms";

void write_trajectory_csv(std::ostream& os, const Trajectory& t);

// Long format: one block per labelled trajectory, with the label in a
// leading column (e.g. "solver" or "run").
void write_labelled_csv(
    std::ostream& os, const std::string& label_column,
    const std::vector<std::pair<std::string, const Trajectory*>>& runs);

// Parses a CSV produced by the writers above back into rows. The optional
// label output receives the leading label column when one is present.
std::vector<TrajectoryRow> read_trajectory_csv(
    std::istream& is, std::vector<std::string>* labels = nullptr);

}  // namespace lase
