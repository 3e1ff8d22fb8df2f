#pragma once

// Usage / event tables shaped like a cluster trace, the preprocessing
// pipeline applied before any analysis, and per-task profiles.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sbp/stats.hpp"

namespace sbp {

struct UsageRecord {
  std::string task_id;
  std::uint64_t interval_index = 0;  // 5-minute reporting slot
  double inst_usage = 0.0;           // sampled 1-second CPU
  double avg_usage = 0.0;            // 5-minute mean CPU

  bool operator==(const UsageRecord&) const = default;
};

/// Task event codes as numbered in the cluster trace task-events table.
enum class EventCode : int {
  submit = 0,
  schedule = 1,
  evict = 2,
  fail = 3,
  finish = 4,
  kill = 5,
  lost = 6,
  update_pending = 7,
  update_running = 8,
};

bool is_failing(EventCode code);

struct EventRecord {
  std::string task_id;
  EventCode code = EventCode::submit;
};

struct TaskProfile {
  std::string task_id;
  EmpiricalDistribution inst;
  EmpiricalDistribution avg;
  double mu = 0.0;     // mean(inst)
  double sigma = 0.0;  // std_dev(inst)
  Histogram histogram{};
  std::size_t duration_records = 0;
};

/// Columns: task_id,interval_index,inst_usage,avg_usage (header required).
/// Throws ParseError naming the offending line.
std::vector<UsageRecord> parse_usage_csv(std::istream& in);

/// Columns: task_id,event_code (header required).
std::vector<EventRecord> parse_events_csv(std::istream& in);

void write_usage_csv(std::ostream& out, std::span<const UsageRecord> records);

/// Drops every record of a task with an EVICT, FAIL, KILL or LOST event.
std::vector<UsageRecord> filter_failing_tasks(std::span<const UsageRecord> records,
                                              std::span<const EventRecord> events);

/// Drops tasks whose instantaneous usage is zero in every record.
std::vector<UsageRecord> drop_zero_usage_tasks(std::span<const UsageRecord> records);

struct ClampResult {
  std::vector<UsageRecord> records;
  std::size_t replaced_count = 0;  // records modified for any reason
  std::size_t inst_clamped = 0;    // records whose inst_usage exceeded 1
};

/// avg_usage > 1 is replaced by the record's inst_usage; inst_usage > 1 is
/// clamped to 1 (and counted in inst_clamped so callers can warn).
ClampResult clamp_invalid(std::span<const UsageRecord> records);

inline constexpr std::size_t kLongTaskRecords = 24;

struct DurationPartition {
  std::vector<TaskProfile> long_tasks;
  std::vector<TaskProfile> short_tasks;
};

DurationPartition partition_by_duration(std::vector<TaskProfile> profiles,
                                         std::size_t threshold_records = kLongTaskRecords);

/// Profile of one task from its records (any order; sorted by interval).
TaskProfile build_profile(std::string task_id, std::span<const UsageRecord> records);

/// Distribution-only constructor used by generators.
TaskProfile make_profile(std::string task_id, std::vector<double> inst, std::vector<double> avg);

/// Groups records by task (first-appearance order) and builds every
/// profile; distinct tasks are built in parallel.
std::vector<TaskProfile> build_profiles(std::span<const UsageRecord> records);

struct PreprocessOptions {
  bool include_short = false;
  std::size_t long_threshold = kLongTaskRecords;
};

struct PreprocessReport {
  std::size_t input_tasks = 0;
  std::size_t failing_tasks = 0;
  std::size_t zero_usage_tasks = 0;
  std::size_t replaced_records = 0;
  std::size_t inst_clamped_records = 0;
  std::size_t short_tasks = 0;
};

struct PreprocessOutput {
  std::vector<TaskProfile> profiles;
  PreprocessReport report;
};

/// The full pipeline: failing-task filter, zero-usage removal, clamping,
/// profile building, and (unless include_short) the long-task cut.
PreprocessOutput preprocess(std::span<const UsageRecord> records,
                            std::span<const EventRecord> events, const PreprocessOptions& opts = {});

struct ProfileSummary {
  std::string task_id;
  std::size_t duration_records = 0;
  double mu = 0.0;
  double sigma = 0.0;
};

/// Columns: task_id,duration_records,mu,sigma.
void write_profile_summary_csv(std::ostream& out, std::span<const TaskProfile> profiles);
std::vector<ProfileSummary> parse_profile_summary_csv(std::istream& in);

/// Relative difference (mean(avg) - mean of k random inst samples) / mean(avg):
/// checks that instantaneous samples are unbiased against the averages.
double mean_relative_difference(const TaskProfile& p, std::size_t k, Rng& rng);

/// Splits the inst samples into non-overlapping windows of `window`
/// consecutive records, picks two distinct windows at random, and compares
/// them with the two-sample KS test. Needs at least two full windows.
TestResult window_invariance_test(const TaskProfile& p, std::size_t window, Rng& rng);

inline constexpr std::size_t kInvarianceWindow = 12;

}  // namespace sbp
