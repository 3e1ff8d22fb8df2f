#include "cli/sweep.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <omp.h>

#include "sbp/csv.hpp"

namespace sbp::cli {

Estimator parse_estimator(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("estimator '" + std::string(spec) + "' needs the form name:value");
  const auto name = csv::trim(spec.substr(0, colon));
  const auto value = csv::parse_double(spec.substr(colon + 1));
  if (!value) throw std::invalid_argument("bad estimator parameter in '" + std::string(spec) + "'");
  Estimator e;
  if (name == "gpa")
    e = GpaEstimator{*value};
  else if (name == "cantelli")
    e = CantelliEstimator{*value};
  else if (name == "av")
    e = AverageEstimator{*value};
  else if (name == "perc")
    e = PercentileEstimator{*value};
  else
    throw std::invalid_argument("unknown estimator '" + std::string(name) + "'");
  validate_estimator(e);
  return e;
}

void SweepGrid::validate() const {
  if (estimators.empty() || capacities.empty() || clairvoyance.empty() || signals.empty())
    throw std::invalid_argument("empty grid");
  for (const auto& e : estimators) validate_estimator(e);
  for (double c : capacities)
    if (!(c > 0.0)) throw std::invalid_argument("capacities must be > 0");
  for (double l : clairvoyance)
    if (!(l > 0.0 && l <= 1.0)) throw std::invalid_argument("clairvoyance must be in (0, 1]");
}

std::string Cell::key() const {
  const auto& p = config.packing;
  return fmt::format("{} capacity={} clairvoyance={} signal={} algorithm={} rebalance={} "
                     "max_failures={} seed={}",
                     estimator_label(p.estimator), csv::format_double(p.capacity),
                     csv::format_double(config.clairvoyance), to_string(config.signal),
                     to_string(p.algorithm), p.rebalance ? 1 : 0, p.max_failures, config.seed);
}

std::vector<Cell> expand_grid(const SweepGrid& grid, std::uint64_t master_seed) {
  grid.validate();
  std::vector<Cell> cells;
  for (const auto& e : grid.estimators)
    for (double c : grid.capacities)
      for (double l : grid.clairvoyance)
        for (Signal s : grid.signals) {
          Cell cell;
          cell.index = cells.size();
          cell.config.clairvoyance = l;
          cell.config.signal = s;
          cell.config.packing = {c, e, grid.algorithm, grid.rebalance, grid.max_failures};
          cell.config.seed = derive_seed(master_seed, cell.index);
          cells.push_back(std::move(cell));
        }
  return cells;
}

std::size_t resolve_jobs(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SBP_JOBS")) {
    if (const auto v = csv::parse_uint(env); v && *v > 0) return static_cast<std::size_t>(*v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::filesystem::path cell_path(const std::filesystem::path& dir, std::size_t index) {
  return dir / fmt::format("cell_{:05d}.csv", index);
}

// Rows already stored for a cell, one per completed instance in instance
// order. A file written for a different cell is ignored; a torn last line
// is dropped.
std::vector<std::string> read_checkpoint(const std::filesystem::path& path, const Cell& cell,
                                         std::size_t instances) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (true) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (lines.empty() || lines.front() != "# cell " + cell.key()) return {};

  std::vector<std::string> rows;
  for (std::size_t i = 1; i < lines.size() && rows.size() < instances; ++i) {
    if (!lines[i].starts_with(std::to_string(rows.size()) + ",")) break;
    rows.push_back(lines[i] + '\n');
  }
  return rows;
}

void start_checkpoint(const std::filesystem::path& path, const Cell& cell,
                      const std::vector<std::string>& rows) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    out << "# cell " << cell.key() << '\n';
    for (const auto& r : rows) out << r;
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void append_checkpoint(const std::filesystem::path& path, const std::string& row) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  out << row;
  out.flush();
  if (!out) throw std::runtime_error("cannot append to checkpoint " + path.string());
}

}  // namespace

SweepReport run_sweep(const std::vector<Cell>& cells, const InstanceSet& instances,
                      const SweepOptions& options, std::ostream& out) {
  SweepReport report;
  report.cells = cells.size();
  std::vector<std::vector<std::string>> rows(cells.size());

  if (options.checkpoint_dir) {
    std::filesystem::create_directories(*options.checkpoint_dir);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto path = cell_path(*options.checkpoint_dir, c);
      rows[c] = read_checkpoint(path, cells[c], instances.count);
      if (rows[c].size() == instances.count) ++report.resumed;
      start_checkpoint(path, cells[c], rows[c]);
    }
  }

  // Instance-major: each instance is built once and shared by every cell
  // still missing its row.
  for (std::size_t i = 0; i < instances.count; ++i) {
    std::vector<std::size_t> pending;
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (rows[c].size() == i) pending.push_back(c);
    if (pending.empty()) continue;

    const Instance inst = instances.make(i);
    const std::string id = std::to_string(i);
    std::vector<std::string> fresh(pending.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&](bool nested) {
      // With several cell workers, keep each cell's kernels single-threaded.
      if (nested) omp_set_num_threads(1);
      while (true) {
        const std::size_t slot = next.fetch_add(1);
        if (slot >= pending.size()) return;
        try {
          std::ostringstream row;
          write_metrics_row(row, run_experiment(inst, cells[pending[slot]].config, id));
          fresh[slot] = row.str();
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };

    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, pending.size()));
    if (jobs == 1) {
      worker(false);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker, true);
      for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t s = 0; s < pending.size(); ++s) {
      const std::size_t c = pending[s];
      if (options.checkpoint_dir) append_checkpoint(cell_path(*options.checkpoint_dir, c), fresh[s]);
      rows[c].push_back(std::move(fresh[s]));
    }
  }

  for (const auto& cell_rows : rows) {
    for (const auto& r : cell_rows) out << r;
    report.rows += cell_rows.size();
  }
  return report;
}

}  // namespace sbp::cli
