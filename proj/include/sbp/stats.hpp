#pragma once

// Empirical-distribution statistics, Gaussian distribution functions,
// normality / equality tests, and histogram clustering.
//
// Every function here is pure: inputs are read-only and random state is
// always owned by the caller.

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sbp {

using Rng = std::mt19937_64;

/// Deterministic generator for a (seed, stream) pair. Distinct streams
/// give independent sub-sequences; used to derive per-task and per-cell
/// seeds from a master seed.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Derives a 64-bit sub-seed from a parent seed and an index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Non-empty list of usage samples, kept in the order they were observed.
class EmpiricalDistribution {
public:
  EmpiricalDistribution() = default;
  explicit EmpiricalDistribution(std::vector<double> samples);

  std::span<const double> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  operator std::span<const double>() const { return samples_; }

private:
  std::vector<double> samples_;
};

inline constexpr std::size_t kHistogramBins = 100;

/// Bin k holds the share of samples in [k/100, (k+1)/100); values at or
/// above 1 land in the last bin.
using Histogram = std::array<double, kHistogramBins>;

struct GaussianParams {
  double mu = 0.0;
  double sigma = 0.0;
};

struct TestResult {
  double statistic = 0.0;
  bool reject = false;
};

double mean(std::span<const double> samples);

/// Population standard deviation (n denominator).
double std_dev(std::span<const double> samples);

/// Nearest-rank percentile, k in (0, 100].
double percentile(std::span<const double> samples, double k);

/// As percentile(), for input that is already sorted ascending.
double percentile_sorted(std::span<const double> sorted, double k);

/// Phi((x - mu) / sigma). sigma == 0 is a unit step at mu.
double gaussian_cdf(double x, GaussianParams g);

/// Survival function 1 - gaussian_cdf, computed without cancellation.
double gaussian_sf(double x, GaussianParams g);

/// Inverse CDF for p in (0, 1) and sigma > 0.
double gaussian_inv_cdf(double p, GaussianParams g);

/// Anderson-Darling test of composite normality (mean and deviation
/// estimated from the data). The statistic is Stephens' small-sample
/// adjusted A*^2; rejection at the 5% level is A*^2 > 0.752.
/// Throws std::invalid_argument for n < 8 or zero variance.
TestResult anderson_darling_normality(std::span<const double> samples);

/// Two-sample Kolmogorov-Smirnov test; rejects at the asymptotic 5% level
/// D > 1.358 * sqrt((n + m) / (n * m)).
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

Histogram make_histogram(std::span<const double> samples);

struct KMeansResult {
  std::vector<std::size_t> assignments;
  std::vector<Histogram> centroids;
  /// Within-cluster sum of squared distances after every iteration.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kKMeansMaxIterations = 300;

/// Lloyd's k-means under the Euclidean metric with k-means++ seeding.
/// Empty clusters are re-seeded with the point farthest from its centroid.
KMeansResult kmeans(std::span<const Histogram> histograms, std::size_t k,
                    std::uint64_t seed);

double squared_distance(const Histogram& a, const Histogram& b);

/// `count` draws with replacement, uniform over `samples`.
std::vector<double> sample_realizations(std::span<const double> samples,
                                        std::size_t count, Rng& rng);

/// Writes the draws into `out` instead of allocating.
void sample_realizations_into(std::span<const double> samples,
                              std::span<double> out, Rng& rng);

}  // namespace sbp
