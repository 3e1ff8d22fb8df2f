#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>

#include <omp.h>

#include "sbp/kernels.hpp"
#include "sbp/matrix.hpp"
#include "sbp/stats.hpp"

using namespace sbp;

namespace {

RealizationMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  RealizationMatrix m(rows, cols);
  Rng rng = make_rng(seed);
  std::exponential_distribution<double> d(30.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t t = 0; t < cols; ++t) m(i, t) = d(rng);
  return m;
}

kernels::Groups random_groups(std::size_t rows, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  kernels::Groups g(count);
  for (std::size_t i = 0; i < rows; ++i) g[i % count].push_back(order[i]);
  return g;
}

}  // namespace

TEST_CASE("matrix sidecar round trip") {
  const auto m = random_matrix(7, 13, 1);
  const auto path = std::filesystem::temp_directory_path() / "sbp_test_matrix.bin";
  save_matrix(path, m);
  CHECK(std::filesystem::file_size(path) == 8 + 7 * 13 * 8);
  CHECK(load_matrix(path) == m);

  // Header layout: two little-endian uint32.
  std::ifstream in(path, std::ios::binary);
  unsigned char header[8];
  in.read(reinterpret_cast<char*>(header), 8);
  CHECK(header[0] == 7);
  CHECK(header[4] == 13);
  CHECK(header[1] == 0);
  in.close();

  std::ofstream(path, std::ios::app | std::ios::binary) << 'x';
  CHECK_THROWS(load_matrix(path));
  std::filesystem::resize_file(path, 20);
  CHECK_THROWS(load_matrix(path));
  std::filesystem::remove(path);
}

TEST_CASE("row moments") {
  RealizationMatrix m(2, 4);
  const double vals[] = {0.0, 1.0, 0.0, 1.0, 0.5, 0.5, 0.5, 0.5};
  for (int i = 0; i < 8; ++i) m(i / 4, i % 4) = vals[i];
  const auto r = kernels::row_moments(m, {0, 4});
  CHECK(r.mean[0] == 0.5);
  CHECK(r.std_dev[0] == 0.5);
  CHECK(r.std_dev[1] == 0.0);
  const auto prefix = kernels::row_moments(m, {0, 1});
  CHECK(prefix.mean[0] == 0.0);
  CHECK_THROWS(kernels::row_moments(m, {2, 2}));
  CHECK_THROWS(kernels::row_moments(m, {0, 5}));
}

TEST_CASE("violation counting") {
  RealizationMatrix m(2, 2);
  m(0, 0) = 0.5;
  m(0, 1) = 0.6;
  m(1, 0) = 0.4;
  m(1, 1) = 0.6;
  const auto v = kernels::violations_per_group(m, {{0, 1}}, {0, 2}, 1.0);
  CHECK(v == std::vector<std::size_t>{1});
  // Exactly at capacity is not a violation.
  RealizationMatrix half(2, 1);
  half(0, 0) = 0.5;
  half(1, 0) = 0.5;
  CHECK(kernels::violations_per_group(half, {{0, 1}}, {0, 1}, 1.0)[0] == 0);
}

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  const auto m = random_matrix(300, 5000, 42);
  const int saved = omp_get_max_threads();
  for (int threads : {1, 2, 3, 8}) {
    omp_set_num_threads(threads);
    for (kernels::ColumnRange cols : {kernels::ColumnRange{0, 5000}, kernels::ColumnRange{17, 2100}}) {
      const auto a = kernels::row_moments(m, cols);
      const auto b = kernels::serial::row_moments(m, cols);
      CHECK(a.mean == b.mean);
      CHECK(a.std_dev == b.std_dev);

      const auto groups = random_groups(300, 11, threads);
      CHECK(kernels::violations_per_group(m, groups, cols, 0.3) ==
            kernels::serial::violations_per_group(m, groups, cols, 0.3));
    }
    std::vector<std::size_t> rows{5, 3, 299, 0, 42};
    CHECK(kernels::sum_rows(m, rows) == kernels::serial::sum_rows(m, rows));
  }
  omp_set_num_threads(saved);
}

TEST_CASE("sum rows follows list order") {
  RealizationMatrix m(3, 1);
  m(0, 0) = 1e16;
  m(1, 0) = 1.0;
  m(2, 0) = -1e16;
  const std::vector<std::size_t> order{0, 2, 1};
  CHECK(kernels::sum_rows(m, order)[0] == 1.0);
  CHECK(kernels::serial::sum_rows(m, std::vector<std::size_t>{0, 1, 2})[0] == 0.0);
}
