#include "sbp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sbp::kernels {

namespace {

void check_range(const RealizationMatrix& m, ColumnRange cols) {
  if (cols.begin > cols.end || cols.end > m.cols())
    throw std::out_of_range("column range outside the matrix");
  if (cols.size() == 0) throw std::invalid_argument("empty column range");
}

// Two-pass moments over one row slice; shared by both variants so the
// arithmetic is identical.
void moments_of(std::span<const double> xs, double& mean_out, double& sd_out) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mu = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  mean_out = mu;
  sd_out = std::sqrt(ss / static_cast<double>(xs.size()));
}

std::size_t count_group(const RealizationMatrix& m, const std::vector<std::size_t>& group,
                        ColumnRange cols, double capacity, std::vector<double>& load) {
  load.assign(cols.size(), 0.0);
  for (std::size_t r : group) {
    const auto row = m.row(r).subspan(cols.begin, cols.size());
    for (std::size_t t = 0; t < row.size(); ++t) load[t] += row[t];
  }
  std::size_t over = 0;
  for (double v : load) over += v > capacity ? 1 : 0;
  return over;
}

}  // namespace

namespace serial {

RowMoments row_moments(const RealizationMatrix& m, ColumnRange cols) {
  check_range(m, cols);
  RowMoments out{std::vector<double>(m.rows()), std::vector<double>(m.rows())};
  for (std::size_t i = 0; i < m.rows(); ++i)
    moments_of(m.row(i).subspan(cols.begin, cols.size()), out.mean[i], out.std_dev[i]);
  return out;
}

std::vector<std::size_t> violations_per_group(const RealizationMatrix& m, const Groups& groups,
                                              ColumnRange cols, double capacity) {
  check_range(m, cols);
  std::vector<std::size_t> out(groups.size(), 0);
  std::vector<double> load;
  for (std::size_t g = 0; g < groups.size(); ++g)
    out[g] = count_group(m, groups[g], cols, capacity, load);
  return out;
}

std::vector<double> sum_rows(const RealizationMatrix& m, std::span<const std::size_t> rows) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t r : rows) {
    const auto row = m.row(r);
    for (std::size_t t = 0; t < row.size(); ++t) out[t] += row[t];
  }
  return out;
}

}  // namespace serial

RowMoments row_moments(const RealizationMatrix& m, ColumnRange cols) {
  check_range(m, cols);
  RowMoments out{std::vector<double>(m.rows()), std::vector<double>(m.rows())};
  const auto n = static_cast<std::int64_t>(m.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    moments_of(m.row(r).subspan(cols.begin, cols.size()), out.mean[r], out.std_dev[r]);
  }
  return out;
}

std::vector<std::size_t> violations_per_group(const RealizationMatrix& m, const Groups& groups,
                                              ColumnRange cols, double capacity) {
  check_range(m, cols);
  std::vector<std::size_t> out(groups.size(), 0);
  const auto n = static_cast<std::int64_t>(groups.size());
#pragma omp parallel
  {
    std::vector<double> load;
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t g = 0; g < n; ++g) {
      const auto idx = static_cast<std::size_t>(g);
      out[idx] = count_group(m, groups[idx], cols, capacity, load);
    }
  }
  return out;
}

std::vector<double> sum_rows(const RealizationMatrix& m, std::span<const std::size_t> rows) {
  std::vector<double> out(m.cols(), 0.0);
  constexpr std::int64_t kBlock = 1024;
  const auto cols = static_cast<std::int64_t>(m.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < cols; b += kBlock) {
    const auto lo = static_cast<std::size_t>(b);
    const auto hi = static_cast<std::size_t>(std::min(b + kBlock, cols));
    for (std::size_t r : rows) {
      const auto row = m.row(r);
      for (std::size_t t = lo; t < hi; ++t) out[t] += row[t];
    }
  }
  return out;
}

}  // namespace sbp::kernels
