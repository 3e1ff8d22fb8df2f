#include "sbp/packing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>
#include <type_traits>

#include <fmt/format.h>

#include "sbp/csv.hpp"
#include "sbp/stats.hpp"

namespace sbp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// What the packer needs per task, computed once.
struct Item {
  double mu = 0.0;
  double var = 0.0;
  double size = 0.0;
};

Item make_item(const TaskStats& t, const Estimator& e) {
  Item it{t.mu, t.sigma * t.sigma, 0.0};
  if (!is_distributional(e)) it.size = effective_size(t, e);
  return it;
}

std::vector<Item> make_items(std::span<const TaskStats> tasks, const Estimator& e) {
  if (std::holds_alternative<PercentileEstimator>(e))
    for (const auto& t : tasks)
      if (t.observed.empty())
        throw std::invalid_argument("task " + t.task_id + " has no observed samples for perc");
  std::vector<Item> items(tasks.size());
  const auto n = static_cast<std::int64_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i)
    items[static_cast<std::size_t>(i)] = make_item(tasks[static_cast<std::size_t>(i)], e);
  return items;
}

double gpa_margin(double mu_sum, double var_sum, double rho, double capacity) {
  return rho - gaussian_sf(capacity, {mu_sum, std::sqrt(var_sum)});
}

FitCheck check(const MachineState& m, const Item& it, const PackingConfig& cfg) {
  if (const auto* g = std::get_if<GpaEstimator>(&cfg.estimator)) {
    const double margin = gpa_margin(m.mu_sum + it.mu, m.var_sum + it.var, g->rho, cfg.capacity);
    return {margin >= 0.0, margin};
  }
  const double left = cfg.capacity - (m.size_sum + it.size);
  return {m.size_sum + it.size <= cfg.capacity, left};
}

void add(MachineState& m, std::size_t task, const Item& it) {
  m.assigned.push_back(task);
  m.mu_sum += it.mu;
  m.var_sum += it.var;
  m.size_sum += it.size;
}

void recompute_sums(MachineState& m, const std::vector<Item>& items) {
  m.mu_sum = m.var_sum = m.size_sum = 0.0;
  for (auto t : m.assigned) {
    m.mu_sum += items[t].mu;
    m.var_sum += items[t].var;
    m.size_sum += items[t].size;
  }
}

PackingResult greedy(std::span<const TaskStats> tasks, const std::vector<Item>& items,
                     const PackingConfig& cfg) {
  PackingResult r;
  r.machine_of.assign(tasks.size(), 0);
  const MachineState empty{};
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const Item& it = items[k];
    std::size_t chosen = r.machines.size();
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < r.machines.size(); ++j) {
      const auto fc = check(r.machines[j], it, cfg);
      if (!fc.fits) continue;
      if (cfg.algorithm == Algorithm::first_fit) {
        chosen = j;
        break;
      }
      if (fc.score < best_score) {  // strict: ties keep the lowest index
        best_score = fc.score;
        chosen = j;
      }
    }
    if (chosen == r.machines.size()) {
      if (!check(empty, it, cfg).fits) throw TaskTooLarge(tasks[k].task_id);
      r.machines.push_back(MachineState{r.machines.size() + 1, {}, 0.0, 0.0, 0.0});
    }
    add(r.machines[chosen], k, it);
    r.machine_of[k] = chosen + 1;
  }
  return r;
}

PackingResult rebalance_items(PackingResult r, const std::vector<Item>& items,
                              const PackingConfig& cfg) {
  const std::size_t m = r.machines.size();
  if (m < 2) return r;
  MachineState& last = r.machines.back();
  std::vector<char> tried(items.size(), 0);
  std::size_t failures = 0;
  std::size_t idle_visits = 0;  // consecutive sources with nothing to try
  std::size_t source = 0;

  while (failures < cfg.max_failures && idle_visits < m - 1) {
    MachineState& from = r.machines[source];
    source = (source + 1) % (m - 1);

    auto candidate = std::find_if(from.assigned.begin(), from.assigned.end(),
                                  [&](std::size_t t) { return !tried[t]; });
    if (from.assigned.size() < 2 || candidate == from.assigned.end()) {
      ++idle_visits;
      continue;
    }
    idle_visits = 0;
    const std::size_t task = *candidate;
    tried[task] = 1;

    bool ok = check(last, items[task], cfg).fits;
    if (ok && is_distributional(cfg.estimator)) {
      // Removal only shrinks mean and variance; for rho < 0.5 the source
      // stays admissible, but a large rho can make a smaller variance worse.
      MachineState rest = from;
      rest.assigned.erase(rest.assigned.begin() + (candidate - from.assigned.begin()));
      recompute_sums(rest, items);
      const auto& g = std::get<GpaEstimator>(cfg.estimator);
      ok = gpa_margin(rest.mu_sum, rest.var_sum, g.rho, cfg.capacity) >= 0.0;
    }
    if (!ok) {
      ++failures;
      continue;
    }
    from.assigned.erase(candidate);
    recompute_sums(from, items);
    add(last, task, items[task]);
    r.machine_of[task] = last.index;
  }
  return r;
}

}  // namespace

TaskTooLarge::TaskTooLarge(const std::string& task_id)
    : std::runtime_error("task " + task_id + " does not fit an empty machine"), task_id_(task_id) {}

std::string estimator_name(const Estimator& e) {
  return std::visit(overloaded{[](const GpaEstimator&) { return std::string("gpa"); },
                               [](const CantelliEstimator&) { return std::string("cantelli"); },
                               [](const AverageEstimator&) { return std::string("av"); },
                               [](const PercentileEstimator&) { return std::string("perc"); }},
                    e);
}

double estimator_parameter(const Estimator& e) {
  return std::visit(overloaded{[](const GpaEstimator& g) { return g.rho; },
                               [](const CantelliEstimator& c) { return c.b; },
                               [](const AverageEstimator& a) { return a.f; },
                               [](const PercentileEstimator& p) { return p.k; }},
                    e);
}

std::string estimator_label(const Estimator& e) {
  return estimator_name(e) + "(" + csv::format_double(estimator_parameter(e)) + ")";
}

bool is_distributional(const Estimator& e) { return std::holds_alternative<GpaEstimator>(e); }

void validate_estimator(const Estimator& e) {
  std::visit(overloaded{[](const GpaEstimator& g) {
                          if (!(g.rho > 0.0 && g.rho < 1.0))
                            throw std::invalid_argument("rho must be in (0, 1)");
                        },
                        [](const CantelliEstimator& c) {
                          if (!(c.b > 0.0)) throw std::invalid_argument("cantelli b must be > 0");
                        },
                        [](const AverageEstimator& a) {
                          if (!(a.f > 0.0)) throw std::invalid_argument("av f must be > 0");
                        },
                        [](const PercentileEstimator& p) {
                          if (!(p.k > 0.0 && p.k <= 100.0))
                            throw std::invalid_argument("perc k must be in (0, 100]");
                        }},
             e);
}

std::string to_string(Algorithm a) { return a == Algorithm::first_fit ? "firstfit" : "bestfit"; }

void PackingConfig::validate() const {
  if (!(capacity > 0.0) || !std::isfinite(capacity))
    throw std::invalid_argument("capacity must be > 0");
  validate_estimator(estimator);
}

TaskStats make_task_stats(std::string task_id, std::span<const double> observed) {
  return TaskStats{std::move(task_id), mean(observed), std_dev(observed), observed};
}

std::map<std::string, std::size_t> PackingResult::assignment(std::span<const TaskStats> tasks) const {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < tasks.size() && i < machine_of.size(); ++i)
    out[tasks[i].task_id] = machine_of[i];
  return out;
}

double fit_bin_gpa(const TaskStats& task, const MachineState& machine, double rho, double capacity) {
  return gpa_margin(machine.mu_sum + task.mu, machine.var_sum + task.sigma * task.sigma, rho,
                    capacity);
}

double effective_size(const TaskStats& task, const Estimator& e) {
  return std::visit(
      overloaded{[](const GpaEstimator&) -> double {
                   throw std::invalid_argument("GPA is distributional: it has no scalar item size");
                 },
                 [&](const CantelliEstimator& c) { return task.mu + c.b * task.sigma; },
                 [&](const AverageEstimator& a) { return a.f * task.mu; },
                 [&](const PercentileEstimator& p) { return percentile(task.observed, p.k); }},
      e);
}

FitCheck fits(const MachineState& machine, const TaskStats& task, const PackingConfig& cfg) {
  return check(machine, make_item(task, cfg.estimator), cfg);
}

PackingResult first_fit(std::span<const TaskStats> tasks, const PackingConfig& cfg) {
  PackingConfig c = cfg;
  c.algorithm = Algorithm::first_fit;
  return pack(tasks, c);
}

PackingResult best_fit(std::span<const TaskStats> tasks, const PackingConfig& cfg) {
  PackingConfig c = cfg;
  c.algorithm = Algorithm::best_fit;
  return pack(tasks, c);
}

PackingResult pack(std::span<const TaskStats> tasks, const PackingConfig& cfg) {
  cfg.validate();
  const auto items = make_items(tasks, cfg.estimator);
  auto result = greedy(tasks, items, cfg);
  if (cfg.rebalance) result = rebalance_items(std::move(result), items, cfg);
  return result;
}

PackingResult rebalance(PackingResult result, std::span<const TaskStats> tasks,
                        const PackingConfig& cfg) {
  cfg.validate();
  const auto items = make_items(tasks, cfg.estimator);
  // The caller's cached sums may come from elsewhere; start from the replay.
  for (auto& m : result.machines) recompute_sums(m, items);
  return rebalance_items(std::move(result), items, cfg);
}

bool set_fits(std::span<const std::size_t> members, std::span<const TaskStats> tasks,
              const PackingConfig& cfg, double slack) {
  MachineState m;
  for (auto t : members) add(m, t, make_item(tasks[t], cfg.estimator));
  if (const auto* g = std::get_if<GpaEstimator>(&cfg.estimator))
    return gpa_margin(m.mu_sum, m.var_sum, g->rho, cfg.capacity) >= -slack;
  return m.size_sum <= cfg.capacity + slack;
}

std::size_t brute_force_min_machines(std::span<const TaskStats> tasks, const PackingConfig& cfg) {
  cfg.validate();
  const std::size_t n = tasks.size();
  if (n > kBruteForceMaxTasks)
    throw std::invalid_argument(fmt::format("brute force supports at most {} tasks", kBruteForceMaxTasks));
  if (n == 0) return 0;

  const auto items = make_items(tasks, cfg.estimator);
  const std::size_t full = (std::size_t{1} << n) - 1;
  // Sums per subset, built from the subset without its lowest task.
  std::vector<double> mu(full + 1, 0.0), var(full + 1, 0.0), size(full + 1, 0.0);
  std::vector<char> feasible(full + 1, 0);
  // Recomputed sums may differ from the greedy's accumulation order in the
  // last bit; the oracle errs on the permissive side so it stays a lower bound.
  constexpr double kSlack = 1e-9;
  for (std::size_t s = 1; s <= full; ++s) {
    const auto low = static_cast<std::size_t>(std::countr_zero(s));
    const std::size_t rest = s & (s - 1);
    mu[s] = mu[rest] + items[low].mu;
    var[s] = var[rest] + items[low].var;
    size[s] = size[rest] + items[low].size;
    if (const auto* g = std::get_if<GpaEstimator>(&cfg.estimator))
      feasible[s] = gpa_margin(mu[s], var[s], g->rho, cfg.capacity) >= -kSlack;
    else
      feasible[s] = size[s] <= cfg.capacity + kSlack;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!feasible[std::size_t{1} << i]) throw TaskTooLarge(tasks[i].task_id);

  constexpr auto kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> best(full + 1, kInf);
  best[0] = 0;
  for (std::size_t s = 1; s <= full; ++s) {
    const std::size_t low = s & (~s + 1);
    // Enumerate subsets of s that contain its lowest task.
    const std::size_t others = s ^ low;
    for (std::size_t sub = others;; sub = (sub - 1) & others) {
      const std::size_t part = sub | low;
      if (feasible[part] && best[s ^ part] != kInf) best[s] = std::min(best[s], best[s ^ part] + 1);
      if (sub == 0) break;
    }
  }
  return best[full];
}

std::vector<std::string> verify_packing(const PackingResult& result, std::span<const TaskStats> tasks,
                                        const PackingConfig& cfg) {
  std::vector<std::string> problems;
  constexpr double kTol = 1e-9;
  std::vector<std::size_t> seen(tasks.size(), 0);
  if (result.machine_of.size() != tasks.size())
    problems.push_back("assignment size differs from task count");
  for (std::size_t j = 0; j < result.machines.size(); ++j) {
    const auto& m = result.machines[j];
    if (m.index != j + 1) problems.push_back(fmt::format("machine {} has index {}", j + 1, m.index));
    if (m.assigned.empty()) problems.push_back(fmt::format("machine {} is empty", j + 1));
    double mu = 0.0, var = 0.0;
    for (auto t : m.assigned) {
      if (t >= tasks.size()) {
        problems.push_back(fmt::format("machine {} holds unknown task {}", j + 1, t));
        continue;
      }
      ++seen[t];
      mu += tasks[t].mu;
      var += tasks[t].sigma * tasks[t].sigma;
      if (t < result.machine_of.size() && result.machine_of[t] != j + 1)
        problems.push_back(fmt::format("task {} listed on machine {} but mapped to {}",
                                       tasks[t].task_id, j + 1, result.machine_of[t]));
    }
    if (std::abs(mu - m.mu_sum) > kTol || std::abs(var - m.var_sum) > kTol)
      problems.push_back(fmt::format("machine {} cached sums drifted", j + 1));
    if (!set_fits(m.assigned, tasks, cfg, kTol))
      problems.push_back(fmt::format("machine {} violates the fit criterion", j + 1));
  }
  for (std::size_t t = 0; t < tasks.size(); ++t)
    if (seen[t] != 1)
      problems.push_back(fmt::format("task {} appears on {} machines", tasks[t].task_id, seen[t]));
  return problems;
}

void write_assignment_csv(std::ostream& out, const PackingResult& result,
                          std::span<const TaskStats> tasks) {
  out << "task_id,machine_index\n";
  for (std::size_t i = 0; i < tasks.size(); ++i)
    out << tasks[i].task_id << ',' << result.machine_of[i] << '\n';
}

void write_machines_csv(std::ostream& out, const PackingResult& result) {
  out << "machine_index,n_tasks,mu_sum,sqrt_var_sum\n";
  for (const auto& m : result.machines)
    out << m.index << ',' << m.assigned.size() << ',' << csv::format_double(m.mu_sum) << ','
        << csv::format_double(std::sqrt(m.var_sum)) << '\n';
}

}  // namespace sbp
