#include "sbp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "sbp/csv.hpp"

namespace sbp {

std::string to_string(Signal s) { return s == Signal::inst ? "inst" : "avg"; }

ObservationSplit split_observation_evaluation(std::size_t realizations, double level) {
  if (!(level > 0.0 && level <= 1.0)) throw std::invalid_argument("clairvoyance must be in (0, 1]");
  if (level == 1.0) return {{0, realizations}, {0, realizations}};
  const auto observed = static_cast<std::size_t>(std::floor(level * static_cast<double>(realizations)));
  if (observed == 0) throw std::invalid_argument("clairvoyance leaves an empty observation set");
  if (observed >= realizations)
    throw std::invalid_argument("clairvoyance leaves an empty evaluation set");
  return {{0, observed}, {observed, realizations}};
}

namespace {

kernels::Groups machine_groups(const PackingResult& result) {
  kernels::Groups groups;
  groups.reserve(result.machines.size());
  for (const auto& m : result.machines) groups.push_back(m.assigned);
  return groups;
}

}  // namespace

std::vector<std::size_t> violations_per_machine(const PackingResult& result,
                                                const RealizationMatrix& inst,
                                                kernels::ColumnRange evaluation, double capacity) {
  return kernels::violations_per_group(inst, machine_groups(result), evaluation, capacity);
}

double compute_q(const PackingResult& result, const RealizationMatrix& inst,
                 kernels::ColumnRange evaluation, double capacity) {
  if (evaluation.size() == 0) throw std::invalid_argument("empty evaluation set");
  if (result.machines.empty()) return 0.0;
  const auto counts = violations_per_machine(result, inst, evaluation, capacity);
  const auto total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  return static_cast<double>(total) /
         (static_cast<double>(result.machines.size()) * static_cast<double>(evaluation.size()));
}

NormalizedMachines compute_normalized_machines(const PackingResult& result,
                                               std::span<const double> task_means, double capacity) {
  if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be > 0");
  double total = 0.0;
  for (double m : task_means) total += m;
  NormalizedMachines out;
  out.m_abs = result.machines.size();
  out.m_norm = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(total / capacity)));
  out.m = static_cast<double>(out.m_abs) / static_cast<double>(out.m_norm);
  return out;
}

std::vector<TaskStats> observation_stats(const Instance& instance, Signal signal,
                                         kernels::ColumnRange observation) {
  const RealizationMatrix& source = signal == Signal::inst ? instance.inst : instance.avg;
  const auto moments = kernels::row_moments(source, observation);
  std::vector<TaskStats> stats(instance.size());
  for (std::size_t i = 0; i < instance.size(); ++i) {
    stats[i].task_id = instance.tasks[i].task_id;
    stats[i].mu = moments.mean[i];
    stats[i].sigma = moments.std_dev[i];
    stats[i].observed = source.row(i).subspan(observation.begin, observation.size());
  }
  return stats;
}

MetricsRow run_experiment(const Instance& instance, const ExperimentConfig& cfg,
                          const std::string& instance_id) {
  cfg.packing.validate();
  if (instance.inst.rows() != instance.size() || instance.avg.rows() != instance.size() ||
      instance.inst.cols() != instance.avg.cols())
    throw std::invalid_argument("instance matrices do not match its task list");

  const auto split = split_observation_evaluation(instance.realizations(), cfg.clairvoyance);
  const auto stats = observation_stats(instance, cfg.signal, split.observation);
  const auto result = pack(stats, cfg.packing);

  std::vector<double> means(instance.size());
  for (std::size_t i = 0; i < instance.size(); ++i) means[i] = instance.tasks[i].mu;
  const auto norm = compute_normalized_machines(result, means, cfg.packing.capacity);

  MetricsRow row;
  row.instance_id = instance_id;
  row.estimator = estimator_name(cfg.packing.estimator);
  row.parameter = estimator_parameter(cfg.packing.estimator);
  row.algorithm = to_string(cfg.packing.algorithm) + (cfg.packing.rebalance ? "" : "-norebalance");
  row.signal = to_string(cfg.signal);
  row.clairvoyance = cfg.clairvoyance;
  row.capacity = cfg.packing.capacity;
  row.m_abs = norm.m_abs;
  row.m_norm = norm.m_norm;
  row.m = norm.m;
  row.q = compute_q(result, instance.inst, split.evaluation, cfg.packing.capacity);
  return row;
}

std::vector<std::size_t> sample_group(std::size_t pool_size, std::size_t n, Rng& rng) {
  if (n > pool_size) throw std::invalid_argument("group larger than the task pool");
  // Partial Fisher-Yates.
  std::vector<std::size_t> idx(pool_size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool_size - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(n);
  return idx;
}

std::vector<double> percentile_prediction_error(const Instance& pool, std::size_t n_per_group,
                                                double k, std::size_t trials, std::uint64_t seed) {
  if (n_per_group < 2) throw std::invalid_argument("groups need at least 2 tasks");
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (!(k > 0.0 && k < 100.0)) throw std::invalid_argument("k must be in (0, 100)");
  if (n_per_group > pool.size()) throw std::invalid_argument("group larger than the task pool");

  std::vector<double> errors(trials, std::nan(""));
  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t tt = 0; tt < n; ++tt) {
    const auto trial = static_cast<std::size_t>(tt);
    Rng rng = make_rng(seed, trial);
    const auto group = sample_group(pool.size(), n_per_group, rng);
    const auto total = kernels::serial::sum_rows(pool.inst, group);
    const double empirical = percentile(total, k);
    double mu = 0.0, var = 0.0;
    for (auto i : group) {
      mu += pool.tasks[i].mu;
      var += pool.tasks[i].sigma * pool.tasks[i].sigma;
    }
    const double predicted = var > 0.0 ? gaussian_inv_cdf(k / 100.0, {mu, std::sqrt(var)}) : mu;
    if (empirical != 0.0) errors[trial] = (predicted - empirical) / empirical;
  }
  std::erase_if(errors, [](double e) { return std::isnan(e); });
  return errors;
}

std::vector<NormalityRate> total_usage_normality_study(const Instance& pool,
                                                       std::span<const std::size_t> group_sizes,
                                                       std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  std::vector<NormalityRate> out;
  for (std::size_t gi = 0; gi < group_sizes.size(); ++gi) {
    const std::size_t size = group_sizes[gi];
    if (size < 8) throw std::invalid_argument("group sizes must be at least 8");
    if (size > pool.size()) throw std::invalid_argument("group larger than the task pool");

    std::vector<char> rejected(trials, 0), degenerate(trials, 0);
    std::vector<double> totals(trials, 0.0);
    const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t tt = 0; tt < n; ++tt) {
      const auto trial = static_cast<std::size_t>(tt);
      Rng rng = make_rng(derive_seed(seed, gi), trial);
      const auto group = sample_group(pool.size(), size, rng);
      const auto total = kernels::serial::sum_rows(pool.inst, group);
      for (auto i : group) totals[trial] += pool.tasks[i].mu;
      const auto [lo, hi] = std::minmax_element(total.begin(), total.end());
      if (total.size() < 8 || *lo == *hi) {
        degenerate[trial] = 1;
        rejected[trial] = 1;
        continue;
      }
      rejected[trial] = anderson_darling_normality(total).reject ? 1 : 0;
    }
    NormalityRate r;
    r.group_size = size;
    r.trials = trials;
    r.rejected = static_cast<std::size_t>(std::count(rejected.begin(), rejected.end(), 1));
    r.degenerate = static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));
    r.mean_total = std::accumulate(totals.begin(), totals.end(), 0.0) / static_cast<double>(trials);
    out.push_back(r);
  }
  return out;
}

void write_metrics_row(std::ostream& out, const MetricsRow& r) {
  out << r.instance_id << ',' << r.estimator << ',' << csv::format_double(r.parameter) << ','
      << r.algorithm << ',' << r.signal << ',' << csv::format_double(r.clairvoyance) << ','
      << csv::format_double(r.capacity) << ',' << r.m_abs << ',' << r.m_norm << ','
      << csv::format_double(r.m) << ',' << csv::format_double(r.q) << '\n';
}

}  // namespace sbp
