#include "sbp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "sbp/csv.hpp"

namespace sbp {

namespace {

constexpr std::string_view kKindNames[] = {"near_zero_spike", "exponential_like", "bimodal",
                                           "uniform_band", "constant"};
constexpr double kBimodalWidth = 0.01;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

std::string_view to_string(ArchetypeKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<ArchetypeKind> parse_archetype_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i)
    if (kKindNames[i] == name) return static_cast<ArchetypeKind>(i);
  return std::nullopt;
}

double Archetype::draw(Rng& rng) const {
  double x = location;
  switch (kind) {
    case ArchetypeKind::near_zero_spike:
      x = std::bernoulli_distribution(weight)(rng) ? uniform(rng, location, location + scale)
                                                   : uniform(rng, 0.0, location);
      break;
    case ArchetypeKind::exponential_like:
      x = location + (scale > 0.0 ? std::exponential_distribution<double>(1.0 / scale)(rng) : 0.0);
      break;
    case ArchetypeKind::bimodal: {
      const double base = std::bernoulli_distribution(weight)(rng) ? location + scale : location;
      x = uniform(rng, base, base + kBimodalWidth);
      break;
    }
    case ArchetypeKind::uniform_band:
      x = uniform(rng, location, location + scale);
      break;
    case ArchetypeKind::constant:
      break;
  }
  return std::clamp(x, 0.0, 1.0);
}

Archetype randomized_archetype(ArchetypeKind kind, Rng& rng) {
  Archetype a{kind, 0.0, 0.0, 0.0};
  switch (kind) {
    case ArchetypeKind::near_zero_spike:
      a.location = 0.01;
      a.scale = uniform(rng, 0.1, 0.4);
      a.weight = uniform(rng, 0.02, 0.08);
      break;
    case ArchetypeKind::exponential_like:
      a.scale = uniform(rng, 0.01, 0.06);
      break;
    case ArchetypeKind::bimodal:
      a.location = uniform(rng, 0.0, 0.02);
      a.scale = uniform(rng, 0.03, 0.1);
      a.weight = uniform(rng, 0.2, 0.5);
      break;
    case ArchetypeKind::uniform_band:
      a.location = uniform(rng, 0.0, 0.03);
      a.scale = uniform(rng, 0.01, 0.06);
      break;
    case ArchetypeKind::constant:
      a.location = uniform(rng, 0.005, 0.05);
      break;
  }
  return a;
}

TaskProfile generate_task(std::string task_id, const Archetype& archetype,
                          std::size_t length_records, Rng& rng) {
  if (length_records == 0) throw std::invalid_argument("length_records must be at least 1");
  std::vector<double> inst(length_records);
  std::vector<double> avg(length_records);
  for (std::size_t t = 0; t < length_records; ++t) {
    double sum = 0.0;
    for (std::size_t h = 0; h < kHiddenDrawsPerAverage; ++h) {
      const double x = archetype.draw(rng);
      if (h == 0) inst[t] = x;
      sum += x;
    }
    avg[t] = sum / static_cast<double>(kHiddenDrawsPerAverage);
  }
  return make_profile(std::move(task_id), std::move(inst), std::move(avg));
}

void validate_mixture(const Mixture& mix) {
  if (mix.empty()) throw std::invalid_argument("mixture has no components");
  double total = 0.0;
  for (const auto& c : mix) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight))
      throw std::invalid_argument("mixture weights must be non-negative");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw std::invalid_argument("mixture weights must sum to 1 (got " + csv::format_double(total) + ")");
}

Mixture parse_mixture(std::string_view spec) {
  Mixture mix;
  for (auto entry : csv::split(spec, ',')) {
    const auto colon = entry.rfind(':');
    if (colon == std::string_view::npos)
      throw std::invalid_argument("mixture entry '" + std::string(entry) + "' lacks ':weight'");
    const auto weight = csv::parse_double(entry.substr(colon + 1));
    if (!weight) throw std::invalid_argument("bad mixture weight in '" + std::string(entry) + "'");

    const auto parts = csv::split(entry.substr(0, colon), '/');
    const auto kind = parse_archetype_kind(parts[0]);
    if (!kind) throw std::invalid_argument("unknown archetype '" + std::string(parts[0]) + "'");
    MixtureComponent c{*kind, std::nullopt, *weight};
    if (parts.size() > 1) {
      if (parts.size() > 4)
        throw std::invalid_argument("too many archetype parameters in '" + std::string(entry) + "'");
      Archetype a{*kind, 0.0, 0.0, 0.0};
      double* fields[] = {&a.location, &a.scale, &a.weight};
      for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto v = csv::parse_double(parts[i]);
        if (!v) throw std::invalid_argument("bad archetype parameter '" + std::string(parts[i]) + "'");
        *fields[i - 1] = *v;
      }
      c.fixed = a;
    }
    mix.push_back(c);
  }
  validate_mixture(mix);
  return mix;
}

std::string format_mixture(const Mixture& mix) {
  std::string out;
  for (const auto& c : mix) {
    if (!out.empty()) out += ',';
    out += to_string(c.kind);
    if (c.fixed)
      out += '/' + csv::format_double(c.fixed->location) + '/' + csv::format_double(c.fixed->scale) +
             '/' + csv::format_double(c.fixed->weight);
    out += ':' + csv::format_double(c.weight);
  }
  return out;
}

Mixture default_mixture() {
  return {{ArchetypeKind::near_zero_spike, std::nullopt, 0.30},
          {ArchetypeKind::exponential_like, std::nullopt, 0.25},
          {ArchetypeKind::bimodal, std::nullopt, 0.15},
          {ArchetypeKind::uniform_band, std::nullopt, 0.20},
          {ArchetypeKind::constant, std::nullopt, 0.10}};
}

Mixture spike_heavy_mixture() {
  return {{ArchetypeKind::near_zero_spike, std::nullopt, 0.8},
          {ArchetypeKind::exponential_like, std::nullopt, 0.2}};
}

namespace {

void fill_rows(Instance& inst, std::size_t i, Rng& rng) {
  sample_realizations_into(inst.tasks[i].inst, inst.inst.row(i), rng);
  sample_realizations_into(inst.tasks[i].avg, inst.avg.row(i), rng);
}

}  // namespace

Instance generate_instance(std::size_t n_tasks, const Mixture& mix, std::size_t realizations,
                           std::uint64_t seed, std::size_t records) {
  if (n_tasks == 0) throw std::invalid_argument("n_tasks must be at least 1");
  if (realizations == 0) throw std::invalid_argument("realizations must be at least 1");
  validate_mixture(mix);

  std::vector<double> weights;
  for (const auto& c : mix) weights.push_back(c.weight);

  Instance out;
  out.tasks.resize(n_tasks);
  out.archetypes.resize(n_tasks);
  out.inst = RealizationMatrix(n_tasks, realizations);
  out.avg = RealizationMatrix(n_tasks, realizations);

  const auto n = static_cast<std::int64_t>(n_tasks);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    Rng rng = make_rng(seed, i);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    const auto& component = mix[pick(rng)];
    const Archetype a = component.fixed ? *component.fixed : randomized_archetype(component.kind, rng);
    out.archetypes[i] = a;
    out.tasks[i] = generate_task("t" + std::to_string(i), a, records, rng);
    fill_rows(out, i, rng);
  }
  return out;
}

Instance instance_from_profiles(std::vector<TaskProfile> profiles, std::size_t realizations,
                                std::uint64_t seed) {
  if (profiles.empty()) throw std::invalid_argument("no task profiles");
  if (realizations == 0) throw std::invalid_argument("realizations must be at least 1");
  Instance out;
  out.tasks = std::move(profiles);
  out.inst = RealizationMatrix(out.tasks.size(), realizations);
  out.avg = RealizationMatrix(out.tasks.size(), realizations);
  const auto n = static_cast<std::int64_t>(out.tasks.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    Rng rng = make_rng(seed, i);
    fill_rows(out, i, rng);
  }
  return out;
}

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& base, std::string_view suffix) {
  return std::filesystem::path(base.string() + std::string(suffix));
}

}  // namespace

void save_instance(const std::filesystem::path& base, const Instance& instance) {
  std::ofstream csv_out(with_suffix(base, ".csv"), std::ios::trunc);
  if (!csv_out) throw std::runtime_error("cannot write " + with_suffix(base, ".csv").string());
  write_profile_summary_csv(csv_out, instance.tasks);
  save_matrix(with_suffix(base, ".inst.bin"), instance.inst);
  save_matrix(with_suffix(base, ".avg.bin"), instance.avg);
}

Instance load_instance(const std::filesystem::path& base) {
  std::ifstream csv_in(with_suffix(base, ".csv"));
  if (!csv_in) throw std::runtime_error("cannot open " + with_suffix(base, ".csv").string());
  const auto summary = parse_profile_summary_csv(csv_in);
  Instance out;
  out.inst = load_matrix(with_suffix(base, ".inst.bin"));
  out.avg = load_matrix(with_suffix(base, ".avg.bin"));
  if (out.inst.rows() != summary.size() || out.avg.rows() != summary.size() ||
      out.inst.cols() != out.avg.cols())
    throw std::runtime_error("instance files disagree on dimensions");
  out.tasks.reserve(summary.size());
  for (std::size_t i = 0; i < summary.size(); ++i) {
    const auto a = out.inst.row(i);
    const auto b = out.avg.row(i);
    auto p = make_profile(summary[i].task_id, {a.begin(), a.end()}, {b.begin(), b.end()});
    p.mu = summary[i].mu;
    p.sigma = summary[i].sigma;
    p.duration_records = summary[i].duration_records;
    out.tasks.push_back(std::move(p));
  }
  return out;
}

std::vector<UsageRecord> to_usage_records(const std::vector<TaskProfile>& tasks) {
  std::vector<UsageRecord> out;
  for (const auto& p : tasks) {
    const auto inst = p.inst.samples();
    const auto avg = p.avg.samples();
    for (std::size_t t = 0; t < inst.size(); ++t) out.push_back({p.task_id, t, inst[t], avg[t]});
  }
  return out;
}

}  // namespace sbp
