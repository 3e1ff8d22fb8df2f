#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "cli/cli.hpp"
#include "oracles.hpp"
#include "sbp/evaluation.hpp"
#include "sbp/packing.hpp"
#include "sbp/stats.hpp"
#include "sbp/synth.hpp"

using namespace sbp;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kInstances = 50;
constexpr std::size_t kTasks = 1000;
constexpr std::size_t kRealizations = 10000;
constexpr std::uint64_t kSeed = 2024;

int failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int id, bool pass, const std::string& desc, const std::string& measured, double secs,
            double budget) {
  const bool in_time = secs < budget;
  const bool ok = pass && in_time;
  if (!ok) ++failures;
  std::cout << fmt::format("{} criterion {}: {} ({}; {:.1f}s of {:.0f}s{})\n", ok ? "PASS" : "FAIL", id, desc,
                           measured, secs, budget, in_time ? "" : ", over budget")
            << std::flush;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Instance from_rows(const std::vector<std::vector<double>>& rows) {
  Instance inst;
  inst.inst = RealizationMatrix(rows.size(), rows.front().size());
  inst.avg = RealizationMatrix(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    inst.tasks.push_back(make_profile("t" + std::to_string(i + 1), rows[i], rows[i]));
    for (std::size_t t = 0; t < rows[i].size(); ++t) inst.inst(i, t) = inst.avg(i, t) = rows[i][t];
  }
  return inst;
}

void intro_example() {
  const auto start = Clock::now();
  // Dyadic pairs x, 1 - x: uniform on [0,1] with mean exactly 0.5.
  std::vector<double> uniform;
  for (std::size_t k = 0; k < kRealizations / 2; ++k) {
    const double x = static_cast<double>((k * 2 + 1) % 1024) / 1024.0;
    uniform.push_back(x);
    uniform.push_back(1.0 - x);
  }
  const std::vector<double> half(uniform.size(), 0.5);

  ExperimentConfig cfg;
  cfg.packing = PackingConfig{1.0, GpaEstimator{0.05}, Algorithm::first_fit, false, kDefaultMaxFailures};
  const auto gpa_inst = from_rows({half, half, uniform});
  const auto stats = observation_stats(gpa_inst, Signal::inst, {0, kRealizations});
  const auto gpa = pack(stats, cfg.packing);
  const bool partition = gpa.machine_count() == 2 &&
                         gpa.machines[0].assigned == std::vector<std::size_t>{0, 1} &&
                         gpa.machines[1].assigned == std::vector<std::size_t>{2};
  const double gpa_q = run_experiment(gpa_inst, cfg).q;

  cfg.packing.estimator = AverageEstimator{1.0};
  const auto av_inst = from_rows({uniform, half, half});
  const auto av = pack(observation_stats(av_inst, Signal::inst, {0, kRealizations}), cfg.packing);
  const auto counts = violations_per_machine(av, av_inst.inst, {0, kRealizations}, 1.0);
  const double worst = static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
                       static_cast<double>(kRealizations);

  report(1, partition && gpa_q < 0.001 && std::abs(worst - 0.5) <= 0.02,
         "introduction example: GPA separates the uniform task, av(1.0) overflows half the time",
         fmt::format("gpa machines {}, gpa q {:.4g}, av machine q {:.4f}", gpa.machine_count(), gpa_q, worst),
         seconds_since(start), 1);
}

void fit_bin_check() {
  const auto start = Clock::now();
  std::vector<double> samples{0.3, 0.7};  // mean 0.5, deviation 0.2
  const auto task = make_task_stats("t", samples);
  const MachineState empty{1, {}, 0, 0, 0};
  const double margin = fit_bin_gpa(task, empty, 0.01, 1.0);
  const double expected = 0.01 - (1.0 - oracle::phi(2.5));
  const double err = std::abs(margin - expected);
  report(2, err <= 1e-5, "GPA margin against a numerically integrated normal tail",
         fmt::format("margin {:.8f}, oracle {:.8f}, |diff| {:.2e}", margin, expected, err), seconds_since(start),
         1);
}

std::vector<TaskStats> small_instance(std::size_t n, Rng& rng, std::vector<std::vector<double>>& storage) {
  std::uniform_int_distribution<int> kind(0, 4);
  std::vector<TaskStats> tasks;
  storage.clear();
  storage.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto arch = randomized_archetype(static_cast<ArchetypeKind>(kind(rng)), rng);
    const auto t = generate_task("t" + std::to_string(i), arch, 60, rng);
    std::vector<double> s(t.inst.samples().begin(), t.inst.samples().end());
    const double peak = *std::max_element(s.begin(), s.end());
    // Peak at most 0.3 keeps mu + 4.4 sigma within one machine.
    const double target = std::uniform_real_distribution<double>(0.1, 0.3)(rng);
    if (peak > 0.0)
      for (auto& x : s) x *= target / peak;
    storage.push_back(std::move(s));
    tasks.push_back(make_task_stats(t.task_id, storage.back()));
  }
  return tasks;
}

void oracle_consistency() {
  const auto start = Clock::now();
  const Estimator estimators[] = {GpaEstimator{0.05},    GpaEstimator{0.01},     CantelliEstimator{1.7},
                                  CantelliEstimator{4.4}, AverageEstimator{1.0},  AverageEstimator{1.25},
                                  PercentileEstimator{95}, PercentileEstimator{100}};
  Rng rng = make_rng(kSeed, 3);
  std::size_t checks = 0, ok = 0;
  std::vector<std::vector<double>> storage;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const auto tasks = small_instance(n, rng, storage);
    for (const auto& e : estimators) {
      PackingConfig cfg{1.0, e, Algorithm::first_fit, false, kDefaultMaxFailures};
      const std::size_t opt = brute_force_min_machines(tasks, cfg);
      const std::size_t ff = first_fit(tasks, cfg).machine_count();
      cfg.algorithm = Algorithm::best_fit;
      const std::size_t bf = best_fit(tasks, cfg).machine_count();
      checks += 2;
      ok += (ff >= opt) + (bf >= opt);
    }
  }
  report(3, ok == checks, "heuristic machine counts never beat the exact minimum",
         fmt::format("{}/{} packings at or above the optimum", ok, checks), seconds_since(start), 30);
}

struct Cell {
  std::string name;
  ExperimentConfig cfg;
  std::vector<double> q, m;
  std::vector<double> tasks_per_machine;
};

ExperimentConfig make_cfg(Estimator e, double capacity = 1.0, double clairvoyance = 1.0,
                          Signal signal = Signal::inst) {
  ExperimentConfig cfg;
  cfg.packing = PackingConfig{capacity, e, Algorithm::best_fit, true, kDefaultMaxFailures};
  cfg.clairvoyance = clairvoyance;
  cfg.signal = signal;
  return cfg;
}

void synthetic_sweep() {
  const auto start = Clock::now();
  std::vector<Cell> cells{
      {"gpa0.1", make_cfg(GpaEstimator{0.1}), {}, {}, {}},
      {"gpa0.05", make_cfg(GpaEstimator{0.05}), {}, {}, {}},
      {"gpa0.01", make_cfg(GpaEstimator{0.01}), {}, {}, {}},
      {"gpa0.001", make_cfg(GpaEstimator{0.001}), {}, {}, {}},
      {"cantelli4.4", make_cfg(CantelliEstimator{4.4}), {}, {}, {}},
      {"cantelli1.7", make_cfg(CantelliEstimator{1.7}), {}, {}, {}},
      {"perc100", make_cfg(PercentileEstimator{100}), {}, {}, {}},
      {"gpa0.01 clair0.01", make_cfg(GpaEstimator{0.01}, 1.0, 0.01), {}, {}, {}},
      {"gpa0.01 avg", make_cfg(GpaEstimator{0.01}, 1.0, 1.0, Signal::avg), {}, {}, {}},
      {"av1.25 c1", make_cfg(AverageEstimator{1.25}), {}, {}, {}},
  };
  const double capacities[] = {0.5, 2.0, 5.0};
  for (double c : capacities) {
    cells.push_back({fmt::format("gpa0.01 c{}", c), make_cfg(GpaEstimator{0.01}, c), {}, {}, {}});
    cells.push_back({fmt::format("av1.25 c{}", c), make_cfg(AverageEstimator{1.25}, c), {}, {}, {}});
  }
  const Estimator verified[] = {GpaEstimator{0.05}, GpaEstimator{0.01}, CantelliEstimator{1.7},
                                AverageEstimator{1.25}, PercentileEstimator{95}};
  std::size_t verified_packings = 0, violations = 0;
  double verify_secs = 0.0;

  for (std::size_t i = 0; i < kInstances; ++i) {
    const auto instance = generate_instance(kTasks, default_mixture(), kRealizations, derive_seed(kSeed, i));
    for (auto& cell : cells) {
      const auto row = run_experiment(instance, cell.cfg, std::to_string(i));
      cell.q.push_back(row.q);
      cell.m.push_back(row.m);
      cell.tasks_per_machine.push_back(static_cast<double>(kTasks) / static_cast<double>(row.m_abs));
    }
    const auto v0 = Clock::now();
    const auto stats = observation_stats(instance, Signal::inst, {0, kRealizations});
    for (const auto& e : verified)
      for (auto a : {Algorithm::first_fit, Algorithm::best_fit}) {
        const PackingConfig cfg{1.0, e, a, true, kDefaultMaxFailures};
        violations += verify_packing(pack(stats, cfg), stats, cfg).size();
        ++verified_packings;
      }
    verify_secs += seconds_since(v0);
  }
  const double total = seconds_since(start);
  auto cell = [&](const std::string& name) -> const Cell& {
    return *std::find_if(cells.begin(), cells.end(), [&](const Cell& c) { return c.name == name; });
  };
  auto mq = [&](const std::string& name) { return mean_of(cell(name).q); };

  report(4, violations == 0, "every machine passes its fit test after rebalancing",
         fmt::format("{} packings over {} instances, {} failing machines", verified_packings, kInstances, violations),
         verify_secs, 120);

  const double rhos[] = {0.1, 0.05, 0.01, 0.001};
  const char* names[] = {"gpa0.1", "gpa0.05", "gpa0.01", "gpa0.001"};
  bool tracks = true;
  std::string measured;
  for (int j = 0; j < 4; ++j) {
    const double q = mq(names[j]);
    const bool ok = j < 3 ? (q >= rhos[j] / 2 && q <= 2 * rhos[j]) : q <= 3 * rhos[j];
    tracks = tracks && ok;
    measured += fmt::format("rho {} -> q {:.4g}{}; ", rhos[j], q, ok ? "" : " out of band");
  }
  const double density = mean_of(cell("gpa0.01").tasks_per_machine);
  tracks = tracks && density >= 10.0;
  measured += fmt::format("{:.1f} tasks/machine", density);
  report(5, tracks, "GPA violation frequency tracks the target", measured, total, 600);

  const double q44 = mq("cantelli4.4"), q17 = mq("cantelli1.7"), q05 = mq("gpa0.05");
  const double m44 = mean_of(cell("cantelli4.4").m), m05 = mean_of(cell("gpa0.05").m);
  const double perc_max = *std::max_element(cell("perc100").q.begin(), cell("perc100").q.end());
  report(6, q44 <= q17 && q17 <= q05 && m44 >= m05 && perc_max == 0.0,
         "conservative baselines order below GPA and use more machines",
         fmt::format("q cantelli4.4 {:.3g} <= cantelli1.7 {:.3g} <= gpa0.05 {:.3g}; m {:.3f} >= {:.3f}; "
                     "perc100 max q {}",
                     q44, q17, q05, m44, m05, perc_max),
         total, 600);

  std::vector<double> gq{mq("gpa0.01 c0.5"), mq("gpa0.01"), mq("gpa0.01 c2"), mq("gpa0.01 c5")};
  std::vector<double> aq{mq("av1.25 c0.5"), mq("av1.25 c1"), mq("av1.25 c2"), mq("av1.25 c5")};
  auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  };
  report(7, spread(gq) < 10.0 && spread(aq) > 10.0, "GPA is stable across capacities, av(1.25) is not",
         fmt::format("gpa0.01 q {:.3g}/{:.3g}/{:.3g}/{:.3g} spread {:.2f}x; av1.25 q {:.3g}/{:.3g}/{:.3g}/{:.3g} "
                     "spread {:.1f}x",
                     gq[0], gq[1], gq[2], gq[3], spread(gq), aq[0], aq[1], aq[2], aq[3], spread(aq)),
         total, 900);

  const double full = mq("gpa0.01"), partial = mq("gpa0.01 clair0.01");
  const double ratio = partial > full ? partial / full : full / partial;
  report(8, ratio <= 2.0, "100 observations are enough for GPA",
         fmt::format("q full {:.4g}, q at 0.01 {:.4g}, ratio {:.2f}", full, partial, ratio), total, 600);

  const double avg_q = mq("gpa0.01 avg");
  report(9, avg_q >= 1.5 * full, "packing from averages raises violations",
         fmt::format("q inst {:.4g}, q avg {:.4g}, ratio {:.2f}", full, avg_q, avg_q / full), total, 600);
}

void calibration() {
  const auto start = Clock::now();
  Rng rng = make_rng(kSeed, 10);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> a(1000), b(1000);
  std::size_t ad = 0, ks = 0;
  const std::size_t trials = 1000;
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = normal(rng);
    ad += anderson_darling_normality(a).reject;
    ks += ks_two_sample(a, b).reject;
  }
  const double ad_rate = static_cast<double>(ad) / trials, ks_rate = static_cast<double>(ks) / trials;

  const auto pool = generate_instance(2000, default_mixture(), 2000, derive_seed(kSeed, 1000));
  const std::vector<std::size_t> sizes{10, 20, 50, 100};
  const auto rates = total_usage_normality_study(pool, sizes, 500, kSeed);
  int inversions = 0;
  bool small = true;
  for (std::size_t i = 1; i < rates.size(); ++i) {
    const double rise = rates[i].rate() - rates[i - 1].rate();
    if (rise > 0.0) {
      ++inversions;
      small = small && rise <= 0.05;
    }
  }
  report(10,
         std::abs(ad_rate - 0.05) <= 0.02 && std::abs(ks_rate - 0.05) <= 0.02 && inversions <= 1 && small,
         "normality tests are calibrated and rejections fall with group size",
         fmt::format("A-D {:.3f}, KS {:.3f}, N=10/20/50/100 rates {:.3f}/{:.3f}/{:.3f}/{:.3f}", ad_rate, ks_rate,
                     rates[0].rate(), rates[1].rate(), rates[2].rate(), rates[3].rate()),
         seconds_since(start), 300);
}

void percentile_direction() {
  const auto start = Clock::now();
  const auto spikes = generate_instance(kTasks, spike_heavy_mixture(), kRealizations, derive_seed(kSeed, 2000));
  const double tail = median_of(percentile_prediction_error(spikes, 20, 99.9, 1000, kSeed));
  const auto mixed = generate_instance(kTasks, default_mixture(), kRealizations, derive_seed(kSeed, 2001));
  const double body = median_of(percentile_prediction_error(mixed, 50, 95, 1000, kSeed));
  report(11, tail <= 0.0 && std::abs(body) <= 0.05, "the Gaussian underestimates rare spikes",
         fmt::format("median error k=99.9 spike-heavy {:.4f}, k=95 default {:.4f}", tail, body),
         seconds_since(start), 300);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  const auto start = Clock::now();
  const fs::path dir = fs::temp_directory_path() / "sbp_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto run_twice = [&](std::vector<std::string> args) {
    std::vector<std::string> texts;
    for (const char* name : {"a.csv", "b.csv"}) {
      auto full = args;
      full.push_back("--out");
      full.push_back((dir / name).string());
      std::ostringstream out, err;
      if (sbp::cli::run(full, out, err) != 0) return false;
      auto text = slurp(dir / name);
      text.erase(0, text.find('\n'));  // the run header names the output file
      texts.push_back(std::move(text));
    }
    return texts[0] == texts[1];
  };
  const bool eval = run_twice({"evaluate", "--estimator", "gpa", "--rho", "0.01", "--instances", "3", "--tasks",
                               "300", "--realizations", "2000", "--seed", "5", "--jobs", "2"});
  const bool sweep = run_twice({"sweep", "--estimators", "gpa:0.05,cantelli:1.7,av:1.25", "--capacities", "1,2",
                                "--signals", "inst,avg", "--instances", "2", "--tasks", "300", "--realizations",
                                "2000", "--seed", "5", "--no-checkpoint"});
  fs::remove_all(dir);
  report(12, eval && sweep, "repeated runs with one seed give identical CSV",
         fmt::format("evaluate {}, sweep {}", eval ? "identical" : "differs", sweep ? "identical" : "differs"),
         seconds_since(start), 60);
}

}  // namespace

int main() {
  std::cout << fmt::format("acceptance: {} instances x {} tasks x {} realizations, seed {}\n", kInstances, kTasks,
                           kRealizations, kSeed);
  intro_example();
  fit_bin_check();
  oracle_consistency();
  synthetic_sweep();
  calibration();
  percentile_direction();
  determinism();
  std::cout << fmt::format("{} of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
