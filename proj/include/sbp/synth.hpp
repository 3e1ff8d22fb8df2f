#pragma once

// Synthetic task profiles and Monte Carlo instances. Per-task usage shapes
// are stylized archetypes of the cluster centroids observed in real usage
// histograms: near-idle tasks with rare spikes, exponential-like tails,
// two-level tasks, flat bands and constant load.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sbp/matrix.hpp"
#include "sbp/stats.hpp"
#include "sbp/trace.hpp"

namespace sbp {

enum class ArchetypeKind { near_zero_spike, exponential_like, bimodal, uniform_band, constant };

std::string_view to_string(ArchetypeKind kind);
std::optional<ArchetypeKind> parse_archetype_kind(std::string_view name);

/// Parameter meaning by kind (all samples are clamped to [0, 1]):
///   near_zero_spike  U[0, location] w.p. 1-weight, else U[location, location+scale]
///   exponential_like location + Exp(mean = scale)
///   bimodal          U[location, location+0.01] w.p. 1-weight,
///                    else U[location+scale, location+scale+0.01]
///   uniform_band     U[location, location+scale]
///   constant         location
struct Archetype {
  ArchetypeKind kind = ArchetypeKind::constant;
  double location = 0.0;
  double scale = 0.0;
  double weight = 0.0;

  double draw(Rng& rng) const;
};

/// Per-task parameters drawn from the kind's default ranges; this is how
/// instances get heterogeneous tasks of the same shape.
Archetype randomized_archetype(ArchetypeKind kind, Rng& rng);

inline constexpr std::size_t kHiddenDrawsPerAverage = 5;

/// `length_records` records; each draws kHiddenDrawsPerAverage values from
/// the archetype: the first is the instantaneous sample, their mean the
/// 5-minute average.
TaskProfile generate_task(std::string task_id, const Archetype& archetype,
                          std::size_t length_records, Rng& rng);

struct MixtureComponent {
  ArchetypeKind kind = ArchetypeKind::constant;
  std::optional<Archetype> fixed;  // empty: randomized per task
  double weight = 0.0;
};

using Mixture = std::vector<MixtureComponent>;

/// Parses "name[/location[/scale[/weight]]]:share" entries separated by
/// commas, e.g. "constant/0.1:1.0" or "exponential_like:0.4,bimodal:0.6".
/// Shares must be non-negative and sum to 1.
Mixture parse_mixture(std::string_view spec);
std::string format_mixture(const Mixture& mix);
void validate_mixture(const Mixture& mix);

/// Default workload: 500 tasks average about 13.7 CPU units in total.
Mixture default_mixture();

/// Dominated by near-idle tasks with rare large spikes.
Mixture spike_heavy_mixture();

struct Instance {
  std::vector<TaskProfile> tasks;
  RealizationMatrix inst;  // tasks x R instantaneous realizations
  RealizationMatrix avg;   // tasks x R average realizations
  std::vector<Archetype> archetypes;  // generator parameters; empty when loaded

  std::size_t size() const { return tasks.size(); }
  std::size_t realizations() const { return inst.cols(); }
};

inline constexpr std::size_t kDefaultRecords = 288;  // one day of 5-minute slots

/// Sub-seed for task i is derived from (seed, i), so instances are
/// reproducible and tasks can be generated in parallel.
Instance generate_instance(std::size_t n_tasks, const Mixture& mix, std::size_t realizations,
                           std::uint64_t seed, std::size_t records = kDefaultRecords);

/// Realization matrices for existing profiles (e.g. ingested tasks).
Instance instance_from_profiles(std::vector<TaskProfile> profiles, std::size_t realizations,
                                std::uint64_t seed);

/// Writes <base>.csv (profile summary), <base>.inst.bin and <base>.avg.bin.
void save_instance(const std::filesystem::path& base, const Instance& instance);

/// Inverse of save_instance. Each task's distributions are its realization
/// rows; mu, sigma and duration_records come from the summary CSV, since
/// those describe the full record history.
Instance load_instance(const std::filesystem::path& base);

/// Usage records for every task of the instance (interval_index = record).
std::vector<UsageRecord> to_usage_records(const std::vector<TaskProfile>& tasks);

}  // namespace sbp
