#pragma once

// Monte Carlo evaluation: observation / evaluation column splits, the
// normalized machine count m and violation frequency q, and the
// total-usage studies (normality of summed usage, Gaussian percentile
// prediction error).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sbp/kernels.hpp"
#include "sbp/packing.hpp"
#include "sbp/synth.hpp"

namespace sbp {

enum class Signal { inst, avg };

std::string to_string(Signal s);

struct ExperimentConfig {
  double clairvoyance = 1.0;  // fraction of realizations visible to the packer
  PackingConfig packing;
  Signal signal = Signal::inst;
  std::uint64_t seed = 0;
};

/// Observation set O and evaluation set E as column ranges. Below full
/// clairvoyance O is the leading floor(level * R) columns and E the rest;
/// at level 1 both cover every column.
struct ObservationSplit {
  kernels::ColumnRange observation;
  kernels::ColumnRange evaluation;
};

ObservationSplit split_observation_evaluation(std::size_t realizations, double level);

/// Fraction over machines and evaluation columns of strictly-over-capacity
/// instantaneous totals: (1 / (m |E|)) * sum_j q(j).
double compute_q(const PackingResult& result, const RealizationMatrix& inst,
                 kernels::ColumnRange evaluation, double capacity);

/// Per-machine violation counts q(j).
std::vector<std::size_t> violations_per_machine(const PackingResult& result,
                                                const RealizationMatrix& inst,
                                                kernels::ColumnRange evaluation, double capacity);

struct NormalizedMachines {
  std::size_t m_abs = 0;
  std::size_t m_norm = 0;
  double m = 0.0;
};

/// m_norm = ceil(sum of full-data task means / capacity), at least 1.
NormalizedMachines compute_normalized_machines(const PackingResult& result,
                                               std::span<const double> task_means, double capacity);

struct MetricsRow {
  std::string instance_id;
  std::string estimator;
  double parameter = 0.0;
  std::string algorithm;  // "firstfit"/"bestfit", "-norebalance" suffix when off
  std::string signal;
  double clairvoyance = 1.0;
  double capacity = 1.0;
  std::size_t m_abs = 0;
  std::size_t m_norm = 0;
  double m = 0.0;
  double q = 0.0;
};

/// Task stats from the observation columns of the chosen signal's matrix.
/// The returned views point into `instance`.
std::vector<TaskStats> observation_stats(const Instance& instance, Signal signal,
                                         kernels::ColumnRange observation);

/// Packs on observation-window statistics and always measures q on the
/// instantaneous matrix's evaluation columns.
MetricsRow run_experiment(const Instance& instance, const ExperimentConfig& cfg,
                          const std::string& instance_id = "0");

/// Relative errors (F^-1(k) - P_k) / P_k, one per trial, between the
/// Gaussian fitted to a random group of tasks (sum of means, root of
/// summed variances) and the empirical k-th percentile of the group's
/// summed instantaneous realizations. Trials with P_k = 0 are skipped.
std::vector<double> percentile_prediction_error(const Instance& pool, std::size_t n_per_group,
                                                double k, std::size_t trials, std::uint64_t seed);

struct NormalityRate {
  std::size_t group_size = 0;
  std::size_t trials = 0;
  std::size_t rejected = 0;
  std::size_t degenerate = 0;  // constant totals; counted as rejections
  double mean_total = 0.0;     // mean over trials of the fitted group mean
  double rate() const { return trials ? static_cast<double>(rejected) / static_cast<double>(trials) : 0.0; }
};

/// Anderson-Darling rejection rate of the summed instantaneous
/// realizations of random task groups, per group size.
std::vector<NormalityRate> total_usage_normality_study(const Instance& pool,
                                                       std::span<const std::size_t> group_sizes,
                                                       std::size_t trials, std::uint64_t seed);

inline constexpr std::string_view kMetricsHeader =
    "instance_id,estimator,params,algorithm,signal,clairvoyance,capacity,m_abs,m_norm,m,q";

void write_metrics_row(std::ostream& out, const MetricsRow& row);

/// Random group of `n` distinct task indices out of `pool_size`.
std::vector<std::size_t> sample_group(std::size_t pool_size, std::size_t n, Rng& rng);

}  // namespace sbp
