#pragma once

// Stochastic bin packing: First Fit / Best Fit driven either by the
// Gaussian Percentile Approximation (GPA) fit test or by a scalar item
// size (Cantelli, scaled mean, observed percentile), followed by an
// optional round-robin rebalancing pass onto the last machine.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sbp {

/// Admit while the Gaussian tail beyond capacity stays below rho.
struct GpaEstimator {
  double rho = 0.05;
};
/// Item size mu + b * sigma.
struct CantelliEstimator {
  double b = 1.7;
};
/// Item size f * mu.
struct AverageEstimator {
  double f = 1.0;
};
/// Item size = k-th percentile of the observation window.
struct PercentileEstimator {
  double k = 100.0;
};

using Estimator = std::variant<GpaEstimator, CantelliEstimator, AverageEstimator, PercentileEstimator>;

/// "gpa", "cantelli", "av" or "perc".
std::string estimator_name(const Estimator& e);
double estimator_parameter(const Estimator& e);
/// Short label such as "gpa(0.05)".
std::string estimator_label(const Estimator& e);
void validate_estimator(const Estimator& e);
bool is_distributional(const Estimator& e);

enum class Algorithm { first_fit, best_fit };

std::string to_string(Algorithm a);

inline constexpr std::size_t kDefaultMaxFailures = 5;

struct PackingConfig {
  double capacity = 1.0;
  Estimator estimator = GpaEstimator{};
  Algorithm algorithm = Algorithm::first_fit;
  bool rebalance = false;
  std::size_t max_failures = kDefaultMaxFailures;

  void validate() const;
};

/// A task as the packer sees it: moments and samples of its observation
/// window. `observed` is a view; the caller keeps the samples alive for
/// the duration of packing.
struct TaskStats {
  std::string task_id;
  double mu = 0.0;
  double sigma = 0.0;
  std::span<const double> observed;
};

/// Builds stats with mu = mean(observed), sigma = std_dev(observed).
TaskStats make_task_stats(std::string task_id, std::span<const double> observed);

struct MachineState {
  std::size_t index = 0;               // 1-based
  std::vector<std::size_t> assigned;   // positions in the task list, insertion order
  double mu_sum = 0.0;
  double var_sum = 0.0;
  double size_sum = 0.0;               // scalar estimators only
};

struct PackingResult {
  std::vector<MachineState> machines;
  std::vector<std::size_t> machine_of;  // per task position, 1-based machine index

  std::size_t machine_count() const { return machines.size(); }
  std::map<std::string, std::size_t> assignment(std::span<const TaskStats> tasks) const;
};

/// Thrown when a task does not fit even an empty machine.
class TaskTooLarge : public std::runtime_error {
public:
  explicit TaskTooLarge(const std::string& task_id);
  const std::string& task_id() const { return task_id_; }

private:
  std::string task_id_;
};

/// rho - (1 - F(c | mu', sigma'^2)) for the machine extended by `task`;
/// the task fits iff the margin is >= 0.
double fit_bin_gpa(const TaskStats& task, const MachineState& machine, double rho, double capacity);

/// Scalar item size for non-GPA estimators. Throws for GPA.
double effective_size(const TaskStats& task, const Estimator& e);

struct FitCheck {
  bool fits = false;
  /// GPA: the FitBin margin. Scalar: capacity left after placement.
  double score = 0.0;
};

FitCheck fits(const MachineState& machine, const TaskStats& task, const PackingConfig& cfg);

PackingResult first_fit(std::span<const TaskStats> tasks, const PackingConfig& cfg);
PackingResult best_fit(std::span<const TaskStats> tasks, const PackingConfig& cfg);

/// Dispatches on cfg.algorithm; applies rebalance() when cfg.rebalance.
PackingResult pack(std::span<const TaskStats> tasks, const PackingConfig& cfg);

/// Round-robin over machines 1..m-1, trying to move each machine's
/// earliest not-yet-tried task onto machine m, until cfg.max_failures
/// failed attempts or no candidates remain. Never changes m and never
/// empties a machine.
PackingResult rebalance(PackingResult result, std::span<const TaskStats> tasks,
                        const PackingConfig& cfg);

inline constexpr std::size_t kBruteForceMaxTasks = 12;

/// Exact minimum machine count by dynamic programming over task subsets.
std::size_t brute_force_min_machines(std::span<const TaskStats> tasks, const PackingConfig& cfg);

/// True when the whole set of tasks satisfies the fit criterion on one
/// machine. `slack` loosens the comparison for recomputed sums.
bool set_fits(std::span<const std::size_t> members, std::span<const TaskStats> tasks,
              const PackingConfig& cfg, double slack = 0.0);

/// Replays a result: checks totality, contiguity, cached sums, and the fit
/// criterion of every machine. Returns human-readable problems (empty when
/// the packing is sound).
std::vector<std::string> verify_packing(const PackingResult& result, std::span<const TaskStats> tasks,
                                        const PackingConfig& cfg);

/// Columns: task_id,machine_index.
void write_assignment_csv(std::ostream& out, const PackingResult& result,
                          std::span<const TaskStats> tasks);
/// Columns: machine_index,n_tasks,mu_sum,sqrt_var_sum.
void write_machines_csv(std::ostream& out, const PackingResult& result);

}  // namespace sbp
