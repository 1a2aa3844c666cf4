#include "lase/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "lase/errors.hpp"

namespace lase {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void write_row(std::ostream& os, const TrajectoryRow& row) {
  os << row.round << ',' << row.iteration << ',' << format_double(row.residual)
     << ',' << format_double(row.dual_gap) << ',' << format_double(row.eta_min)
     << ',' << format_double(row.eta_max) << ',' << format_double(row.v_max)
     << ',' << row.samples << ',' << format_double(row.wall_ms) << '\n';
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
  os << kTrajectoryHeader << '\n';
  for (const auto& row : t.rows) write_row(os, row);
}

void write_labelled_csv(
    std::ostream& os, const std::string& label_column,
    const std::vector<std::pair<std::string, const Trajectory*>>& runs) {
  os << label_column << ',' << kTrajectoryHeader << '\n';
  for (const auto& [label, trajectory] : runs)
    for (const auto& row : trajectory->rows) {
      os << label << ',';
      write_row(os, row);
    }
}

std::vector<TrajectoryRow> read_trajectory_csv(
    std::istream& is, std::vector<std::string>* labels) {
  std::string line;
  if (!std::getline(is, line)) throw UsageError("csv: missing header");
  const bool labelled = !line.starts_with("round,");
  std::vector<TrajectoryRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_line(line);
    std::size_t at = 0;
    if (labelled) {
      if (labels) labels->push_back(cells.at(at));
      ++at;
    }
    if (cells.size() != at + 9) throw UsageError("csv: malformed row");
    TrajectoryRow row;
    row.round = std::atoi(cells[at + 0].c_str());
    row.iteration = std::atoll(cells[at + 1].c_str());
    row.residual = std::strtod(cells[at + 2].c_str(), nullptr);
    row.dual_gap = std::strtod(cells[at + 3].c_str(), nullptr);
    row.eta_min = std::strtod(cells[at + 4].c_str(), nullptr);
    row.eta_max = std::strtod(cells[at + 5].c_str(), nullptr);
    row.v_max = std::strtod(cells[at + 6].c_str(), nullptr);
    row.samples = std::atoll(cells[at + 7].c_str());
    row.wall_ms = std::strtod(cells[at + 8].c_str(), nullptr);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lase
