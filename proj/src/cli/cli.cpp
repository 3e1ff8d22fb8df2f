#include "cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cli/sweep.hpp"
#include "sbp/csv.hpp"
#include "sbp/evaluation.hpp"
#include "sbp/packing.hpp"
#include "sbp/synth.hpp"
#include "sbp/trace.hpp"

namespace sbp::cli {

namespace {

// Raised for invalid flag combinations detected after parsing.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SourceOptions {
  std::string usage;
  std::string events;
  std::string instance;
  bool include_short = false;
  std::size_t long_threshold = kLongTaskRecords;
  std::size_t tasks = 0;
  std::size_t records = kDefaultRecords;
  std::size_t realizations = 10000;
  std::string mix = "default";
};

struct EstimatorOptions {
  std::string name;
  std::optional<double> rho, b, f, k;
};

struct PackingOptions {
  EstimatorOptions estimator;
  double capacity = 1.0;
  std::string algorithm = "bestfit";
  bool no_rebalance = false;
  std::size_t max_failures = kDefaultMaxFailures;
};

struct Options {
  std::uint64_t seed = 0;
  std::string out;
  SourceOptions source;
  PackingOptions packing;
  std::size_t jobs = 0;

  // ingest
  std::size_t invariance_window = 0;
  // synth
  std::string usage_out;
  // pack
  std::string machines_out;
  // evaluate / sweep
  std::size_t instances = 1;
  double clairvoyance = 1.0;
  std::string signal = "inst";
  std::vector<std::string> estimators;
  std::vector<double> capacities{1.0};
  std::vector<double> clairvoyance_levels{1.0};
  std::vector<std::string> signals{"inst"};
  std::string checkpoint_dir;
  bool no_checkpoint = false;
  // studies
  std::vector<std::size_t> group_sizes{10, 20, 30, 50, 100};
  std::size_t group_size = 20;
  std::vector<double> percentiles{95.0, 99.0, 99.9};
  std::size_t trials = 1000;
  std::size_t clusters = 16;
  std::string assignments_out;
};

Mixture resolve_mixture(const std::string& spec) {
  if (spec == "default") return default_mixture();
  if (spec == "spike_heavy") return spike_heavy_mixture();
  return parse_mixture(spec);
}

Estimator resolve_estimator(const EstimatorOptions& o) {
  auto need = [](const std::optional<double>& v, const char* flag, const std::string& name) {
    if (!v) throw UsageError(fmt::format("--estimator {} requires {}", name, flag));
    return *v;
  };
  Estimator e;
  if (o.name == "gpa")
    e = GpaEstimator{need(o.rho, "--rho", o.name)};
  else if (o.name == "cantelli")
    e = CantelliEstimator{need(o.b, "--b", o.name)};
  else if (o.name == "av")
    e = AverageEstimator{need(o.f, "--f", o.name)};
  else if (o.name == "perc")
    e = PercentileEstimator{need(o.k, "--k", o.name)};
  else
    throw UsageError("unknown estimator '" + o.name + "'");
  validate_estimator(e);
  return e;
}

Algorithm resolve_algorithm(const std::string& name) {
  if (name == "firstfit") return Algorithm::first_fit;
  if (name == "bestfit") return Algorithm::best_fit;
  throw UsageError("unknown algorithm '" + name + "'");
}

Signal resolve_signal(const std::string& name) {
  if (name == "inst") return Signal::inst;
  if (name == "avg") return Signal::avg;
  throw UsageError("unknown signal '" + name + "'");
}

PackingConfig resolve_packing(const PackingOptions& o) {
  PackingConfig cfg{o.capacity, resolve_estimator(o.estimator), resolve_algorithm(o.algorithm),
                    !o.no_rebalance, o.max_failures};
  cfg.validate();
  return cfg;
}

enum class SourceKind { usage, instance, synthetic };

SourceKind resolve_source(const SourceOptions& s) {
  const int chosen = !s.usage.empty() + !s.instance.empty() + (s.tasks > 0);
  if (chosen != 1) throw UsageError("choose exactly one of --usage, --instance, --tasks");
  if (!s.usage.empty()) return SourceKind::usage;
  if (!s.instance.empty()) return SourceKind::instance;
  resolve_mixture(s.mix);
  return SourceKind::synthetic;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

// "# sbp <version> <command> name=value ..." with every option of the
// subcommand except those that do not affect results.
std::string run_spec_line(const CLI::App& sub) {
  std::string line = fmt::format("# sbp {} {}", kVersion, sub.get_name());
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name == "--help" || name == "--jobs" || name == "--checkpoint-dir") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      for (std::size_t i = 0; i < results.size(); ++i) value += (i ? ";" : "") + results[i];
    } else {
      value = opt->get_default_str();
    }
    if (value.empty()) continue;
    line += fmt::format(" {}={}", name.substr(2), value);
  }
  return line;
}

PreprocessOutput ingest_usage(const SourceOptions& s, std::ostream& err) {
  auto usage_in = open_input(s.usage);
  const auto records = parse_usage_csv(usage_in);
  std::vector<EventRecord> events;
  if (!s.events.empty()) {
    auto events_in = open_input(s.events);
    events = parse_events_csv(events_in);
  }
  auto out = preprocess(records, events, {s.include_short, s.long_threshold});
  if (out.report.inst_clamped_records > 0)
    err << "warning: clamped " << out.report.inst_clamped_records
        << " records with instantaneous usage above 1\n";
  return out;
}

std::vector<TaskProfile> load_profiles(const SourceOptions& s, std::uint64_t seed, std::ostream& err) {
  switch (resolve_source(s)) {
    case SourceKind::usage:
      return ingest_usage(s, err).profiles;
    case SourceKind::instance:
      return load_instance(s.instance).tasks;
    case SourceKind::synthetic:
      return generate_instance(s.tasks, resolve_mixture(s.mix), 1, seed, s.records).tasks;
  }
  return {};
}

InstanceSet make_instance_set(const SourceOptions& s, std::size_t count, std::uint64_t seed,
                              std::ostream& err) {
  switch (resolve_source(s)) {
    case SourceKind::usage: {
      auto profiles = std::make_shared<const std::vector<TaskProfile>>(ingest_usage(s, err).profiles);
      if (profiles->empty()) throw std::runtime_error("no tasks survive preprocessing");
      const std::size_t r = s.realizations;
      return {count, [profiles, r, seed](std::size_t i) {
                return instance_from_profiles(*profiles, r, derive_seed(seed, i));
              }};
    }
    case SourceKind::instance: {
      auto loaded = std::make_shared<const Instance>(load_instance(s.instance));
      return {1, [loaded](std::size_t) { return *loaded; }};
    }
    case SourceKind::synthetic: {
      const Mixture mix = resolve_mixture(s.mix);
      const SourceOptions src = s;
      return {count, [mix, src, seed](std::size_t i) {
                return generate_instance(src.tasks, mix, src.realizations, derive_seed(seed, i),
                                         src.records);
              }};
    }
  }
  return {};
}

// Pool for the studies: an instance whose rows are the task realizations.
Instance make_pool(const SourceOptions& s, std::uint64_t seed, std::ostream& err) {
  return make_instance_set(s, 1, seed, err).make(0);
}

enum SourceFlags : unsigned { kTrace = 1, kInstanceFile = 2, kSynthetic = 4, kRealizations = 8 };

void add_source_options(CLI::App* sub, SourceOptions& s, unsigned flags) {
  if (flags & kTrace) {
    sub->add_option("--usage", s.usage, "Usage CSV (task_id,interval_index,inst_usage,avg_usage)");
    sub->add_option("--events", s.events, "Events CSV (task_id,event_code)");
    sub->add_flag("--include-short", s.include_short, "Keep tasks shorter than --long-threshold");
    sub->add_option("--long-threshold", s.long_threshold, "Records defining a long task");
  }
  if (flags & kInstanceFile)
    sub->add_option("--instance", s.instance, "Instance base path (<base>.csv, .inst.bin, .avg.bin)");
  if (flags & kSynthetic) {
    sub->add_option("--tasks", s.tasks, "Synthetic tasks per instance");
    sub->add_option("--records", s.records, "Records per synthetic task");
    sub->add_option("--mix", s.mix, "Archetype mixture: default, spike_heavy, or name:weight,...");
  }
  if (flags & kRealizations) sub->add_option("--realizations", s.realizations, "Realizations R per task");
}

void add_packing_options(CLI::App* sub, PackingOptions& p, bool single_estimator) {
  if (single_estimator) {
    sub->add_option("--estimator", p.estimator.name, "gpa, cantelli, av or perc")->required();
    sub->add_option("--rho", p.estimator.rho, "GPA overflow probability");
    sub->add_option("--b", p.estimator.b, "Cantelli multiplier");
    sub->add_option("--f", p.estimator.f, "av multiplier");
    sub->add_option("--k", p.estimator.k, "perc percentile");
    sub->add_option("--capacity", p.capacity, "Machine capacity c");
  }
  sub->add_option("--algorithm", p.algorithm, "firstfit or bestfit");
  sub->add_flag("--no-rebalance", p.no_rebalance, "Skip the rebalancing pass");
  sub->add_option("--max-failures", p.max_failures, "Rebalancing failure budget");
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------- commands

int cmd_ingest(const CLI::App& sub, const Options& o, std::ostream& out, std::ostream& err) {
  if (o.source.usage.empty()) throw UsageError("ingest requires --usage");
  const auto result = ingest_usage(o.source, err);
  auto file = open_output(o.out);
  file << run_spec_line(sub) << '\n';
  write_profile_summary_csv(file, result.profiles);

  const auto& r = result.report;
  std::string invariance;
  if (o.invariance_window > 0) {
    std::size_t tested = 0, rejected = 0;
    for (std::size_t i = 0; i < result.profiles.size(); ++i) {
      if (result.profiles[i].inst.size() < 2 * o.invariance_window) continue;
      Rng rng = make_rng(o.seed, i);
      ++tested;
      rejected += window_invariance_test(result.profiles[i], o.invariance_window, rng).reject;
    }
    invariance = fmt::format(", window KS rejects {}/{}", rejected, tested);
  }
  out << fmt::format(
      "ingest: {} tasks in, {} failing, {} zero-usage, {} short dropped, {} records replaced, {} "
      "profiles written{}\n",
      r.input_tasks, r.failing_tasks, r.zero_usage_tasks, o.source.include_short ? 0 : r.short_tasks,
      r.replaced_records, result.profiles.size(), invariance);
  return kOk;
}

int cmd_synth(const CLI::App& sub, const Options& o, std::ostream& out, std::ostream&) {
  if (o.source.tasks == 0) throw UsageError("synth requires --tasks");
  const Mixture mix = resolve_mixture(o.source.mix);
  const std::size_t r = std::max<std::size_t>(1, o.source.realizations);
  const Instance inst = generate_instance(o.source.tasks, mix, r, o.seed, o.source.records);

  auto file = open_output(o.out);
  file << run_spec_line(sub) << '\n';
  write_profile_summary_csv(file, inst.tasks);
  file.close();
  if (o.source.realizations > 0) {
    std::string base = o.out;
    if (base.size() > 4 && base.ends_with(".csv")) base.resize(base.size() - 4);
    save_matrix(base + ".inst.bin", inst.inst);
    save_matrix(base + ".avg.bin", inst.avg);
  }
  if (!o.usage_out.empty()) {
    auto usage = open_output(o.usage_out);
    usage << run_spec_line(sub) << '\n';
    write_usage_csv(usage, to_usage_records(inst.tasks));
  }
  double total = 0.0;
  for (const auto& t : inst.tasks) total += t.mu;
  out << fmt::format("synth: {} tasks, mean total usage {:.4f}\n", inst.size(), total);
  return kOk;
}

int cmd_pack(const CLI::App& sub, const Options& o, const PackingConfig& cfg, std::ostream& out,
             std::ostream& err) {
  const auto profiles = load_profiles(o.source, o.seed, err);
  if (profiles.empty()) throw std::runtime_error("no tasks to pack");
  std::vector<TaskStats> stats;
  stats.reserve(profiles.size());
  for (const auto& p : profiles) stats.push_back(make_task_stats(p.task_id, p.inst));
  const auto result = pack(stats, cfg);

  auto file = open_output(o.out);
  file << run_spec_line(sub) << '\n';
  write_assignment_csv(file, result, stats);
  if (!o.machines_out.empty()) {
    auto machines = open_output(o.machines_out);
    machines << run_spec_line(sub) << '\n';
    write_machines_csv(machines, result);
  }
  std::vector<double> means;
  for (const auto& p : profiles) means.push_back(p.mu);
  const auto norm = compute_normalized_machines(result, means, cfg.capacity);
  out << fmt::format("pack: {} tasks on {} machines ({}), m = {:.4f}\n", stats.size(), norm.m_abs,
                     estimator_label(cfg.estimator), norm.m);
  return kOk;
}

int run_grid(const CLI::App& sub, const Options& o, const std::vector<Cell>& cells,
             std::optional<std::filesystem::path> checkpoint, std::ostream& out, std::ostream& err) {
  const auto instances = make_instance_set(o.source, o.instances, o.seed, err);
  std::ostringstream rows;
  const auto report = run_sweep(cells, instances, {checkpoint, resolve_jobs(o.jobs)}, rows);
  auto file = open_output(o.out);
  file << run_spec_line(sub) << '\n' << kMetricsHeader << '\n' << rows.str();
  out << fmt::format("{}: {} cells x {} instances = {} rows ({} cells resumed) -> {}\n",
                     sub.get_name(), report.cells, instances.count, report.rows, report.resumed, o.out);
  return kOk;
}

int cmd_evaluate(const CLI::App& sub, const Options& o, const PackingConfig& cfg, std::ostream& out,
                 std::ostream& err) {
  Cell cell;
  cell.config = {o.clairvoyance, cfg, resolve_signal(o.signal), derive_seed(o.seed, 0)};
  return run_grid(sub, o, {cell}, std::nullopt, out, err);
}

int cmd_sweep(const CLI::App& sub, const Options& o, const SweepGrid& grid, std::ostream& out,
              std::ostream& err) {
  const auto cells = expand_grid(grid, o.seed);
  std::optional<std::filesystem::path> checkpoint;
  if (!o.no_checkpoint)
    checkpoint = o.checkpoint_dir.empty() ? std::filesystem::path(o.out + ".cells")
                                          : std::filesystem::path(o.checkpoint_dir);
  return run_grid(sub, o, cells, checkpoint, out, err);
}

int cmd_study_normality(const CLI::App& sub, const Options& o, std::ostream& out, std::ostream& err) {
  const Instance pool = make_pool(o.source, o.seed, err);
  const auto rates = total_usage_normality_study(pool, o.group_sizes, o.trials, o.seed);
  auto file = open_output(o.out);
  file << run_spec_line(sub) << '\n' << "group_size,trials,rejected,degenerate,rate,mean_total\n";
  std::string summary;
  for (const auto& r : rates) {
    file << r.group_size << ',' << r.trials << ',' << r.rejected << ',' << r.degenerate << ','
         << csv::format_double(r.rate()) << ',' << csv::format_double(r.mean_total) << '\n';
    summary += fmt::format(" N={}:{:.3f}", r.group_size, r.rate());
  }
  out << "study-normality: A-D rejection" << summary << '\n';
  return kOk;
}

int cmd_study_percentiles(const CLI::App& sub, const Options& o, std::ostream& out,
                          std::ostream& err) {
  const Instance pool = make_pool(o.source, o.seed, err);
  auto file = open_output(o.out);
  file << run_spec_line(sub) << '\n' << "percentile,trial,relative_error\n";
  std::string summary;
  for (std::size_t pi = 0; pi < o.percentiles.size(); ++pi) {
    const double k = o.percentiles[pi];
    const auto errors =
        percentile_prediction_error(pool, o.group_size, k, o.trials, derive_seed(o.seed, pi));
    for (std::size_t t = 0; t < errors.size(); ++t)
      file << csv::format_double(k) << ',' << t << ',' << csv::format_double(errors[t]) << '\n';
    summary += fmt::format(" k={}:median={:+.4f}", csv::format_double(k), median(errors));
  }
  out << "study-percentiles:" << summary << '\n';
  return kOk;
}

int cmd_study_clusters(const CLI::App& sub, const Options& o, std::ostream& out, std::ostream& err) {
  const auto profiles = load_profiles(o.source, o.seed, err);
  if (profiles.size() < o.clusters) throw std::runtime_error("fewer tasks than clusters");
  std::vector<Histogram> histograms;
  histograms.reserve(profiles.size());
  for (const auto& p : profiles) histograms.push_back(p.histogram);
  const auto result = kmeans(histograms, o.clusters, o.seed);

  std::vector<std::size_t> sizes(o.clusters, 0);
  for (auto a : result.assignments) ++sizes[a];
  auto file = open_output(o.out);
  file << run_spec_line(sub) << '\n' << "cluster,share";
  for (std::size_t b = 0; b < kHistogramBins; ++b) file << ",bin_" << b;
  file << '\n';
  for (std::size_t c = 0; c < o.clusters; ++c) {
    file << c << ',' << csv::format_double(static_cast<double>(sizes[c]) / static_cast<double>(profiles.size()));
    for (double v : result.centroids[c]) file << ',' << csv::format_double(v);
    file << '\n';
  }
  if (!o.assignments_out.empty()) {
    auto a = open_output(o.assignments_out);
    a << run_spec_line(sub) << '\n' << "task_id,cluster\n";
    for (std::size_t i = 0; i < profiles.size(); ++i)
      a << profiles[i].task_id << ',' << result.assignments[i] << '\n';
  }
  out << fmt::format("study-clusters: {} tasks, k = {}, {} iterations, inertia {:.6f}\n",
                     profiles.size(), o.clusters, result.iterations, result.inertia_history.back());
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic bin packing with Gaussian percentile approximation", "sbp"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Options o;

  auto* ingest = app.add_subcommand("ingest", "Preprocess a usage trace into task profiles");
  add_source_options(ingest, o.source, kTrace);
  ingest->add_option("--invariance-window", o.invariance_window,
                     "Records per window for the KS time-invariance check (0: skip)");

  auto* synth = app.add_subcommand("synth", "Generate synthetic task profiles");
  add_source_options(synth, o.source, kSynthetic | kRealizations);
  synth->add_option("--usage-out", o.usage_out, "Also write the records as a usage CSV");

  auto* pack_cmd = app.add_subcommand("pack", "Pack tasks onto machines");
  add_source_options(pack_cmd, o.source, kTrace | kInstanceFile | kSynthetic);
  add_packing_options(pack_cmd, o.packing, true);
  pack_cmd->add_option("--machines-out", o.machines_out, "Machines summary CSV");

  auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo evaluation of one configuration");
  add_source_options(evaluate, o.source, kTrace | kInstanceFile | kSynthetic | kRealizations);
  add_packing_options(evaluate, o.packing, true);
  evaluate->add_option("--instances", o.instances, "Number of instances");
  evaluate->add_option("--clairvoyance", o.clairvoyance, "Observed fraction of realizations");
  evaluate->add_option("--signal", o.signal, "inst or avg statistics for packing");
  evaluate->add_option("--jobs", o.jobs, "Worker threads (default $SBP_JOBS or CPU count)");

  auto* sweep = app.add_subcommand("sweep", "Grid of configurations over a fixed instance set");
  add_source_options(sweep, o.source, kTrace | kInstanceFile | kSynthetic | kRealizations);
  add_packing_options(sweep, o.packing, false);
  sweep->add_option("--estimators", o.estimators, "Estimators, e.g. gpa:0.05,av:1.25")
      ->required()
      ->delimiter(',');
  sweep->add_option("--capacities", o.capacities, "Machine capacities")->delimiter(',');
  sweep->add_option("--clairvoyance", o.clairvoyance_levels, "Clairvoyance levels")->delimiter(',');
  sweep->add_option("--signals", o.signals, "inst and/or avg")->delimiter(',');
  sweep->add_option("--instances", o.instances, "Number of instances");
  sweep->add_option("--checkpoint-dir", o.checkpoint_dir, "Per-cell checkpoints (default <out>.cells)");
  sweep->add_flag("--no-checkpoint", o.no_checkpoint, "Disable checkpoint files");
  sweep->add_option("--jobs", o.jobs, "Parallel grid cells (default $SBP_JOBS or CPU count)");

  auto* normality = app.add_subcommand("study-normality", "A-D normality of summed usage by group size");
  add_source_options(normality, o.source, kTrace | kInstanceFile | kSynthetic | kRealizations);
  normality->add_option("--group-sizes", o.group_sizes, "Group sizes N")->delimiter(',');
  normality->add_option("--trials", o.trials, "Groups per size");

  auto* percentiles = app.add_subcommand("study-percentiles", "Gaussian vs empirical percentile error");
  add_source_options(percentiles, o.source, kTrace | kInstanceFile | kSynthetic | kRealizations);
  percentiles->add_option("--group-size", o.group_size, "Tasks per group");
  percentiles->add_option("--percentiles", o.percentiles, "Percentiles k")->delimiter(',');
  percentiles->add_option("--trials", o.trials, "Groups per percentile");

  auto* clusters = app.add_subcommand("study-clusters", "k-means over usage histograms");
  add_source_options(clusters, o.source, kTrace | kInstanceFile | kSynthetic);
  clusters->add_option("--k", o.clusters, "Number of clusters");
  clusters->add_option("--assignments-out", o.assignments_out, "Per-task cluster CSV");

  for (auto* sub : {ingest, synth, pack_cmd, evaluate, sweep, normality, percentiles, clusters}) {
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--out", o.out, "Output CSV")->required();
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsageError;
  }

  CLI::App* sub = app.get_subcommands().front();

  // Validation: everything that can be checked before touching data.
  PackingConfig cfg;
  SweepGrid grid;
  try {
    if (sub == pack_cmd || sub == evaluate) cfg = resolve_packing(o.packing);
    if (sub == evaluate) {
      resolve_signal(o.signal);
      if (!(o.clairvoyance > 0.0 && o.clairvoyance <= 1.0))
        throw UsageError("--clairvoyance must be in (0, 1]");
    }
    if (sub == sweep) {
      for (const auto& e : o.estimators) grid.estimators.push_back(parse_estimator(e));
      grid.capacities = o.capacities;
      grid.clairvoyance = o.clairvoyance_levels;
      for (const auto& s : o.signals) grid.signals.push_back(resolve_signal(s));
      grid.algorithm = resolve_algorithm(o.packing.algorithm);
      grid.rebalance = !o.packing.no_rebalance;
      grid.max_failures = o.packing.max_failures;
      grid.validate();
    }
    if (sub == evaluate || sub == sweep) {
      if (o.instances == 0) throw UsageError("--instances must be at least 1");
      if (o.source.realizations == 0) throw UsageError("--realizations must be at least 1");
    }
    if (sub == pack_cmd || sub == evaluate || sub == sweep || sub == normality ||
        sub == percentiles || sub == clusters)
      resolve_source(o.source);
    if (sub == synth) resolve_mixture(o.source.mix);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (sub == ingest) return cmd_ingest(*sub, o, out, err);
    if (sub == synth) return cmd_synth(*sub, o, out, err);
    if (sub == pack_cmd) return cmd_pack(*sub, o, cfg, out, err);
    if (sub == evaluate) return cmd_evaluate(*sub, o, cfg, out, err);
    if (sub == sweep) return cmd_sweep(*sub, o, grid, out, err);
    if (sub == normality) return cmd_study_normality(*sub, o, out, err);
    if (sub == percentiles) return cmd_study_percentiles(*sub, o, out, err);
    if (sub == clusters) return cmd_study_clusters(*sub, o, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace sbp::cli
