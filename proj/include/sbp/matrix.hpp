#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace sbp {

/// Dense row-major matrix of realizations: one row per task, one column
/// per realization index.
class RealizationMatrix {
public:
  RealizationMatrix() = default;
  RealizationMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  double operator()(std::size_t i, std::size_t t) const { return data_[i * cols_ + t]; }
  double& operator()(std::size_t i, std::size_t t) { return data_[i * cols_ + t]; }

  std::span<const double> data() const { return data_; }

  bool operator==(const RealizationMatrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Binary sidecar: 8-byte header (two little-endian uint32: rows, cols)
/// followed by rows*cols little-endian IEEE-754 doubles, row-major.
void save_matrix(const std::filesystem::path& path, const RealizationMatrix& m);
RealizationMatrix load_matrix(const std::filesystem::path& path);

}  // namespace sbp
