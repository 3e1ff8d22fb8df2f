#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sbp/stats.hpp"

namespace sbp {

double squared_distance(const Histogram& a, const Histogram& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < kHistogramBins; ++i) {
    const double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

namespace {

std::size_t nearest(const Histogram& h, const std::vector<Histogram>& centroids, double* dist) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(h, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

std::vector<Histogram> plus_plus_init(std::span<const Histogram> points, std::size_t k, Rng& rng) {
  std::vector<Histogram> centroids;
  centroids.reserve(k);
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  centroids.push_back(points[first(rng)]);

  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d2[i] = squared_distance(points[i], centroids[0]);

  while (centroids.size() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      std::discrete_distribution<std::size_t> by_distance(d2.begin(), d2.end());
      pick = by_distance(rng);
    } else {
      // All remaining points coincide with a centroid.
      std::uniform_int_distribution<std::size_t> any(0, points.size() - 1);
      pick = any(rng);
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i)
      d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
  }
  return centroids;
}

double inertia(std::span<const Histogram> points, const std::vector<std::size_t>& assignment,
               const std::vector<Histogram>& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    total += squared_distance(points[i], centroids[assignment[i]]);
  return total;
}

}  // namespace

KMeansResult kmeans(std::span<const Histogram> points, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (k > points.size()) throw std::invalid_argument("k exceeds the number of histograms");

  Rng rng = make_rng(seed, 0x6b6d);
  KMeansResult result;
  result.centroids = plus_plus_init(points, k, rng);
  result.assignments.assign(points.size(), 0);

  std::vector<double> dist(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    result.assignments[i] = nearest(points[i], result.centroids, &dist[i]);

  result.inertia_history.push_back(inertia(points, result.assignments, result.centroids));

  for (std::size_t iter = 0; iter < kKMeansMaxIterations; ++iter) {
    // Update: bin-wise means of the members.
    std::vector<Histogram> sums(k, Histogram{});
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& s = sums[result.assignments[i]];
      for (std::size_t b = 0; b < kHistogramBins; ++b) s[b] += points[i][b];
      ++sizes[result.assignments[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      for (std::size_t b = 0; b < kHistogramBins; ++b)
        result.centroids[c][b] = sums[c][b] / static_cast<double>(sizes[c]);
    }
    // Empty clusters take over the point farthest from its centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (sizes[result.assignments[i]] < 2) continue;
        const double d = squared_distance(points[i], result.centroids[result.assignments[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --sizes[result.assignments[far]];
      result.assignments[far] = c;
      sizes[c] = 1;
      result.centroids[c] = points[far];
    }
    for (auto& centroid : result.centroids) {
      const double total = std::accumulate(centroid.begin(), centroid.end(), 0.0);
      if (total > 0.0)
        for (double& v : centroid) v /= total;
    }

    // Assignment.
    std::size_t changed = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t best = nearest(points[i], result.centroids, &dist[i]);
      if (best != result.assignments[i]) {
        // Keep the incumbent on exact ties so the loop terminates.
        if (dist[i] < squared_distance(points[i], result.centroids[result.assignments[i]])) {
          result.assignments[i] = best;
          ++changed;
        }
      }
    }
    result.iterations = iter + 1;
    result.inertia_history.push_back(inertia(points, result.assignments, result.centroids));
    if (changed == 0) break;
  }
  return result;
}

}  // namespace sbp
