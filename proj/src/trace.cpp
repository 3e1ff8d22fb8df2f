#include "sbp/trace.hpp"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "sbp/csv.hpp"

namespace sbp {

namespace {

void expect_header(std::istream& in, std::size_t& line_no, std::span<const std::string_view> columns) {
  std::string line;
  if (!csv::next_record(in, line, line_no)) throw ParseError("missing header row", 0);
  const auto fields = csv::split(line);
  bool ok = fields.size() == columns.size();
  for (std::size_t i = 0; ok && i < fields.size(); ++i) ok = fields[i] == columns[i];
  if (!ok) {
    std::string expected;
    for (auto c : columns) expected += (expected.empty() ? "" : ",") + std::string(c);
    throw ParseError("expected header '" + expected + "'", line_no);
  }
}

// Task ids in first-appearance order with their record indices.
struct TaskGroups {
  std::vector<std::string> ids;
  std::vector<std::vector<std::size_t>> members;
};

TaskGroups group_by_task(std::span<const UsageRecord> records) {
  TaskGroups g;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [it, inserted] = index.try_emplace(records[i].task_id, g.ids.size());
    if (inserted) {
      g.ids.push_back(records[i].task_id);
      g.members.emplace_back();
    }
    g.members[it->second].push_back(i);
  }
  return g;
}

}  // namespace

bool is_failing(EventCode code) {
  return code == EventCode::evict || code == EventCode::fail || code == EventCode::kill ||
         code == EventCode::lost;
}

std::vector<UsageRecord> parse_usage_csv(std::istream& in) {
  static constexpr std::string_view kColumns[] = {"task_id", "interval_index", "inst_usage",
                                                  "avg_usage"};
  std::size_t line_no = 0;
  expect_header(in, line_no, kColumns);

  std::vector<UsageRecord> records;
  std::string line;
  while (csv::next_record(in, line, line_no)) {
    const auto f = csv::split(line);
    if (f.size() != 4) throw ParseError("expected 4 columns, got " + std::to_string(f.size()), line_no);
    if (f[0].empty()) throw ParseError("empty task_id", line_no);
    const auto interval = csv::parse_uint(f[1]);
    if (!interval) throw ParseError("bad interval_index '" + std::string(f[1]) + "'", line_no);
    const auto inst = csv::parse_double(f[2]);
    if (!inst) throw ParseError("bad inst_usage '" + std::string(f[2]) + "'", line_no);
    const auto avg = csv::parse_double(f[3]);
    if (!avg) throw ParseError("bad avg_usage '" + std::string(f[3]) + "'", line_no);
    if (*inst < 0.0 || *avg < 0.0) throw ParseError("negative usage", line_no);
    records.push_back({std::string(f[0]), *interval, *inst, *avg});
  }
  return records;
}

std::vector<EventRecord> parse_events_csv(std::istream& in) {
  static constexpr std::string_view kColumns[] = {"task_id", "event_code"};
  std::size_t line_no = 0;
  expect_header(in, line_no, kColumns);

  std::vector<EventRecord> events;
  std::string line;
  while (csv::next_record(in, line, line_no)) {
    const auto f = csv::split(line);
    if (f.size() != 2) throw ParseError("expected 2 columns, got " + std::to_string(f.size()), line_no);
    const auto code = csv::parse_int(f[1]);
    if (!code || *code < 0 || *code > static_cast<int>(EventCode::update_running))
      throw ParseError("unknown event_code '" + std::string(f[1]) + "'", line_no);
    events.push_back({std::string(f[0]), static_cast<EventCode>(*code)});
  }
  return events;
}

void write_usage_csv(std::ostream& out, std::span<const UsageRecord> records) {
  out << "task_id,interval_index,inst_usage,avg_usage\n";
  for (const auto& r : records)
    out << r.task_id << ',' << r.interval_index << ',' << csv::format_double(r.inst_usage) << ','
        << csv::format_double(r.avg_usage) << '\n';
}

std::vector<UsageRecord> filter_failing_tasks(std::span<const UsageRecord> records,
                                              std::span<const EventRecord> events) {
  std::unordered_set<std::string> failing;
  for (const auto& e : events)
    if (is_failing(e.code)) failing.insert(e.task_id);
  std::vector<UsageRecord> out;
  out.reserve(records.size());
  for (const auto& r : records)
    if (!failing.contains(r.task_id)) out.push_back(r);
  return out;
}

std::vector<UsageRecord> drop_zero_usage_tasks(std::span<const UsageRecord> records) {
  std::unordered_set<std::string> active;
  for (const auto& r : records)
    if (r.inst_usage != 0.0) active.insert(r.task_id);
  std::vector<UsageRecord> out;
  out.reserve(records.size());
  for (const auto& r : records)
    if (active.contains(r.task_id)) out.push_back(r);
  return out;
}

ClampResult clamp_invalid(std::span<const UsageRecord> records) {
  ClampResult result;
  result.records.assign(records.begin(), records.end());
  for (auto& r : result.records) {
    bool modified = false;
    if (r.inst_usage > 1.0) {
      r.inst_usage = 1.0;
      ++result.inst_clamped;
      modified = true;
    }
    if (r.avg_usage > 1.0) {
      r.avg_usage = r.inst_usage;
      modified = true;
    }
    if (modified) ++result.replaced_count;
  }
  return result;
}

DurationPartition partition_by_duration(std::vector<TaskProfile> profiles,
                                         std::size_t threshold_records) {
  DurationPartition parts;
  for (auto& p : profiles) {
    if (p.duration_records >= threshold_records)
      parts.long_tasks.push_back(std::move(p));
    else
      parts.short_tasks.push_back(std::move(p));
  }
  return parts;
}

TaskProfile make_profile(std::string task_id, std::vector<double> inst, std::vector<double> avg) {
  if (inst.size() != avg.size())
    throw std::invalid_argument("inst and avg sample counts differ for task " + task_id);
  TaskProfile p;
  p.task_id = std::move(task_id);
  p.duration_records = inst.size();
  p.inst = EmpiricalDistribution(std::move(inst));
  p.avg = EmpiricalDistribution(std::move(avg));
  p.mu = mean(p.inst);
  p.sigma = std_dev(p.inst);
  p.histogram = make_histogram(p.inst);
  return p;
}

TaskProfile build_profile(std::string task_id, std::span<const UsageRecord> records) {
  if (records.empty()) throw std::invalid_argument("no records for task " + task_id);
  std::vector<const UsageRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& r : records) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](auto* a, auto* b) { return a->interval_index < b->interval_index; });
  std::vector<double> inst;
  std::vector<double> avg;
  inst.reserve(ordered.size());
  avg.reserve(ordered.size());
  for (const auto* r : ordered) {
    inst.push_back(r->inst_usage);
    avg.push_back(r->avg_usage);
  }
  return make_profile(std::move(task_id), std::move(inst), std::move(avg));
}

std::vector<TaskProfile> build_profiles(std::span<const UsageRecord> records) {
  const auto groups = group_by_task(records);
  std::vector<TaskProfile> profiles(groups.ids.size());
  const auto n = static_cast<std::int64_t>(groups.ids.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t g = 0; g < n; ++g) {
    const auto gi = static_cast<std::size_t>(g);
    std::vector<UsageRecord> mine;
    mine.reserve(groups.members[gi].size());
    for (auto idx : groups.members[gi]) mine.push_back(records[idx]);
    profiles[gi] = build_profile(groups.ids[gi], mine);
  }
  return profiles;
}

PreprocessOutput preprocess(std::span<const UsageRecord> records,
                            std::span<const EventRecord> events, const PreprocessOptions& opts) {
  PreprocessOutput out;
  auto& rep = out.report;
  rep.input_tasks = group_by_task(records).ids.size();

  auto survivors = filter_failing_tasks(records, events);
  const auto after_failing = group_by_task(survivors).ids.size();
  rep.failing_tasks = rep.input_tasks - after_failing;

  survivors = drop_zero_usage_tasks(survivors);
  const auto after_zero = group_by_task(survivors).ids.size();
  rep.zero_usage_tasks = after_failing - after_zero;

  auto clamped = clamp_invalid(survivors);
  rep.replaced_records = clamped.replaced_count;
  rep.inst_clamped_records = clamped.inst_clamped;

  auto parts = partition_by_duration(build_profiles(clamped.records), opts.long_threshold);
  rep.short_tasks = parts.short_tasks.size();
  out.profiles = std::move(parts.long_tasks);
  if (opts.include_short)
    for (auto& p : parts.short_tasks) out.profiles.push_back(std::move(p));
  return out;
}

void write_profile_summary_csv(std::ostream& out, std::span<const TaskProfile> profiles) {
  out << "task_id,duration_records,mu,sigma\n";
  for (const auto& p : profiles)
    out << p.task_id << ',' << p.duration_records << ',' << csv::format_double(p.mu) << ','
        << csv::format_double(p.sigma) << '\n';
}

std::vector<ProfileSummary> parse_profile_summary_csv(std::istream& in) {
  static constexpr std::string_view kColumns[] = {"task_id", "duration_records", "mu", "sigma"};
  std::size_t line_no = 0;
  expect_header(in, line_no, kColumns);
  std::vector<ProfileSummary> out;
  std::string line;
  while (csv::next_record(in, line, line_no)) {
    const auto f = csv::split(line);
    if (f.size() != 4) throw ParseError("expected 4 columns", line_no);
    const auto records = csv::parse_uint(f[1]);
    const auto mu = csv::parse_double(f[2]);
    const auto sigma = csv::parse_double(f[3]);
    if (!records || !mu || !sigma || *sigma < 0.0) throw ParseError("bad profile row", line_no);
    out.push_back({std::string(f[0]), static_cast<std::size_t>(*records), *mu, *sigma});
  }
  return out;
}

double mean_relative_difference(const TaskProfile& p, std::size_t k, Rng& rng) {
  if (k == 0 || k > p.inst.size()) throw std::invalid_argument("k must be in [1, duration]");
  const double y = mean(p.avg);
  if (y == 0.0) throw std::invalid_argument("task has zero mean average usage");
  std::vector<double> subset;
  subset.reserve(k);
  const auto inst = p.inst.samples();
  std::sample(inst.begin(), inst.end(), std::back_inserter(subset), k, rng);
  return (y - mean(subset)) / y;
}

TestResult window_invariance_test(const TaskProfile& p, std::size_t window, Rng& rng) {
  if (window == 0) throw std::invalid_argument("window must be positive");
  const std::size_t windows = p.inst.size() / window;
  if (windows < 2) throw std::invalid_argument("need at least two full windows");
  std::uniform_int_distribution<std::size_t> pick(0, windows - 1);
  const std::size_t a = pick(rng);
  std::size_t b = pick(rng);
  while (b == a) b = pick(rng);
  const auto inst = p.inst.samples();
  return ks_two_sample(inst.subspan(a * window, window), inst.subspan(b * window, window));
}

}  // namespace sbp
