#pragma once

// Experiment grids: the Cartesian product of estimators, capacities,
// clairvoyance levels and input signals over a fixed instance set, run on
// a worker pool with one checkpoint file per grid cell.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sbp/evaluation.hpp"

namespace sbp::cli {

/// "gpa:0.05", "cantelli:1.7", "av:1.25", "perc:99".
Estimator parse_estimator(std::string_view spec);

struct SweepGrid {
  std::vector<Estimator> estimators;
  std::vector<double> capacities;
  std::vector<double> clairvoyance;
  std::vector<Signal> signals;
  Algorithm algorithm = Algorithm::best_fit;
  bool rebalance = true;
  std::size_t max_failures = kDefaultMaxFailures;

  void validate() const;
};

struct Cell {
  std::size_t index = 0;
  ExperimentConfig config;
  /// Stable description, stored in the checkpoint file.
  std::string key() const;
};

/// Cells in estimator-major order, then capacity, clairvoyance, signal.
/// Per-cell seeds are derived from `master_seed` and the cell index.
std::vector<Cell> expand_grid(const SweepGrid& grid, std::uint64_t master_seed);

/// Instance i of the fixed instance set.
struct InstanceSet {
  std::size_t count = 0;
  std::function<Instance(std::size_t)> make;
};

struct SweepOptions {
  std::optional<std::filesystem::path> checkpoint_dir;  // none: no checkpointing
  std::size_t jobs = 1;
};

struct SweepReport {
  std::size_t cells = 0;
  std::size_t resumed = 0;  // cells taken from checkpoints
  std::size_t rows = 0;
};

/// Runs every cell and writes its rows (no header) to `out` in cell
/// order, instance order within a cell. Output does not depend on `jobs`.
SweepReport run_sweep(const std::vector<Cell>& cells, const InstanceSet& instances,
                      const SweepOptions& options, std::ostream& out);

/// Worker count: `requested` when non-zero, else $SBP_JOBS, else the
/// number of hardware threads.
std::size_t resolve_jobs(std::size_t requested);

}  // namespace sbp::cli
