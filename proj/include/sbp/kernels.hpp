#pragma once

// Data-parallel kernels over realization matrices. Each kernel has an
// OpenMP version (sbp::kernels) and a plain serial reference
// (sbp::kernels::serial) kept for testing and benchmarking. Both produce
// bit-identical results: the parallel versions split work across rows,
// groups, or column blocks but never change a summation order.

#include <cstddef>
#include <span>
#include <vector>

#include "sbp/matrix.hpp"

namespace sbp::kernels {

/// Half-open column interval [begin, end).
struct ColumnRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

struct RowMoments {
  std::vector<double> mean;
  std::vector<double> std_dev;  // population
};

using Groups = std::vector<std::vector<std::size_t>>;

RowMoments row_moments(const RealizationMatrix& m, ColumnRange cols);

/// For each group of rows, the number of columns in `cols` where the
/// column sum over the group's rows (in group order) is strictly greater
/// than `capacity`.
std::vector<std::size_t> violations_per_group(const RealizationMatrix& m, const Groups& groups,
                                              ColumnRange cols, double capacity);

/// Element-wise sum of the listed rows, accumulated in list order.
std::vector<double> sum_rows(const RealizationMatrix& m, std::span<const std::size_t> rows);

namespace serial {

RowMoments row_moments(const RealizationMatrix& m, ColumnRange cols);
std::vector<std::size_t> violations_per_group(const RealizationMatrix& m, const Groups& groups,
                                              ColumnRange cols, double capacity);
std::vector<double> sum_rows(const RealizationMatrix& m, std::span<const std::size_t> rows);

}  // namespace serial

}  // namespace sbp::kernels
