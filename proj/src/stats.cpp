#include "sbp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sbp {

namespace {

void require_nonempty(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample");
}

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Standard normal CDF and survival function through erfc, which keeps
// full relative accuracy in both tails.
double phi(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double phi_sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

double phi_density(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Acklam's rational approximation to the standard normal quantile
// (relative error below 1.15e-9 before refinement).
double standard_normal_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  constexpr double p_high = 1.0 - p_low;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= p_high) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Newton step on Phi(x) - p.
  const double density = phi_density(x);
  if (density > 0.0) x -= (phi(x) - p) / density;
  return x;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over a combined word.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
    : samples_(std::move(samples)) {
  require_nonempty(samples_);
}

double mean(std::span<const double> samples) {
  require_nonempty(samples);
  double sum = 0.0;
  for (double s : samples) sum += s;
  return sum / static_cast<double>(samples.size());
}

double std_dev(std::span<const double> samples) {
  const double mu = mean(samples);
  double ss = 0.0;
  for (double s : samples) ss += (s - mu) * (s - mu);
  return std::sqrt(ss / static_cast<double>(samples.size()));
}

double percentile_sorted(std::span<const double> sorted, double k) {
  require_nonempty(sorted);
  if (!(k > 0.0 && k <= 100.0)) throw std::invalid_argument("percentile k must be in (0, 100]");
  const auto n = static_cast<double>(sorted.size());
  // ceil(k/100 * n) without the k=100 -> n*(1+eps) rounding surprise.
  auto rank = static_cast<std::size_t>(std::ceil(k * n / 100.0 - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double percentile(std::span<const double> samples, double k) {
  require_nonempty(samples);
  if (!(k > 0.0 && k <= 100.0)) throw std::invalid_argument("percentile k must be in (0, 100]");
  std::vector<double> work(samples.begin(), samples.end());
  const auto n = static_cast<double>(work.size());
  auto rank = static_cast<std::size_t>(std::ceil(k * n / 100.0 - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, work.size());
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(rank - 1), work.end());
  return work[rank - 1];
}

double gaussian_cdf(double x, GaussianParams g) {
  if (g.sigma <= 0.0) return x >= g.mu ? 1.0 : 0.0;
  return phi((x - g.mu) / g.sigma);
}

double gaussian_sf(double x, GaussianParams g) {
  if (g.sigma <= 0.0) return x >= g.mu ? 0.0 : 1.0;
  return phi_sf((x - g.mu) / g.sigma);
}

double gaussian_inv_cdf(double p, GaussianParams g) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("probability must be in (0, 1)");
  if (!(g.sigma > 0.0)) throw std::invalid_argument("inverse CDF needs sigma > 0");
  return g.mu + g.sigma * standard_normal_quantile(p);
}

TestResult anderson_darling_normality(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 8) throw std::invalid_argument("degenerate sample: need at least 8 points");

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) throw std::invalid_argument("degenerate sample: zero variance");

  const double mu = mean(sorted);
  double ss = 0.0;
  for (double s : sorted) ss += (s - mu) * (s - mu);
  // Stephens' critical values for the estimated-parameters case assume the
  // unbiased (n - 1) deviation.
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw std::invalid_argument("degenerate sample: zero variance");

  const auto nd = static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z_lo = (sorted[i] - mu) / sd;
    const double z_hi = (sorted[n - 1 - i] - mu) / sd;
    const double term = std::log(phi(z_lo)) + std::log(phi_sf(z_hi));
    acc += static_cast<double>(2 * i + 1) * term;
  }
  double a2 = -nd - acc / nd;
  if (std::isnan(a2)) a2 = std::numeric_limits<double>::infinity();

  const double adjusted = a2 * (1.0 + 0.75 / nd + 2.25 / (nd * nd));
  return {adjusted, adjusted > 0.752};
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a);
  require_nonempty(b);
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const auto n = static_cast<double>(sa.size());
  const auto m = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double critical = 1.358 * std::sqrt((n + m) / (n * m));
  return {d, d > critical};
}

Histogram make_histogram(std::span<const double> samples) {
  require_nonempty(samples);
  std::array<std::size_t, kHistogramBins> counts{};
  for (double s : samples) {
    const double scaled = std::floor(s * 100.0);
    const auto bin = scaled <= 0.0 ? std::size_t{0}
                                   : std::min(static_cast<std::size_t>(scaled), kHistogramBins - 1);
    ++counts[bin];
  }
  Histogram h{};
  const auto n = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < kHistogramBins; ++k) h[k] = static_cast<double>(counts[k]) / n;
  return h;
}

void sample_realizations_into(std::span<const double> samples, std::span<double> out, Rng& rng) {
  require_nonempty(samples);
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  for (double& v : out) v = samples[pick(rng)];
}

std::vector<double> sample_realizations(std::span<const double> samples, std::size_t count,
                                        Rng& rng) {
  if (count == 0) throw std::invalid_argument("realization count must be at least 1");
  std::vector<double> out(count);
  sample_realizations_into(samples, out, rng);
  return out;
}

}  // namespace sbp
