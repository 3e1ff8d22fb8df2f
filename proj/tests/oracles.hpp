#pragma once

// Reference computations used only by tests. None of these call into the
// library, so they can check it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

namespace oracle {

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

/// Standard normal CDF by composite Simpson integration of the density.
inline double phi(double z, int intervals = 200000) {
  const double lo = -12.0;
  if (z <= lo) return 0.0;
  const double h = (z - lo) / intervals;
  double s = normal_pdf(lo) + normal_pdf(z);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * normal_pdf(lo + i * h);
  return s * h / 3.0;
}

/// Root of f(x) = target for increasing f, by bisection on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double target, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Adjusted Rand index from the contingency table.
inline double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1;
    rows[a[i]] += 1;
    cols[b[i]] += 1;
  }
  auto c2 = [](double n) { return n * (n - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [k, v] : table) index += c2(v);
  for (const auto& [k, v] : rows) sa += c2(v);
  for (const auto& [k, v] : cols) sb += c2(v);
  const double expected = sa * sb / c2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sa + sb);
  return (index - expected) / (max_index - expected);
}

/// Calls visit(labels, parts) for every set partition of n items, as
/// restricted growth strings.
inline void for_each_partition(std::size_t n,
                               const std::function<void(const std::vector<std::size_t>&, std::size_t)>& visit) {
  std::vector<std::size_t> labels(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t parts) {
    if (i == n) {
      visit(labels, parts);
      return;
    }
    for (std::size_t p = 0; p <= parts; ++p) {
      labels[i] = p;
      rec(i + 1, std::max(parts, p + 1));
    }
  };
  if (n == 0) visit(labels, 0);
  else rec(0, 0);
}

}  // namespace oracle
