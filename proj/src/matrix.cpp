#include "sbp/matrix.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

namespace sbp {

static_assert(std::endian::native == std::endian::little,
              "matrix sidecar I/O assumes a little-endian host");

RealizationMatrix::RealizationMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

void save_matrix(const std::filesystem::path& path, const RealizationMatrix& m) {
  constexpr auto limit = std::numeric_limits<std::uint32_t>::max();
  if (m.rows() > limit || m.cols() > limit)
    throw std::invalid_argument("matrix too large for the sidecar header");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(m.rows()),
                                   static_cast<std::uint32_t>(m.cols())};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  out.write(reinterpret_cast<const char*>(m.data().data()),
            static_cast<std::streamsize>(m.data().size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

RealizationMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::uint32_t header[2] = {0, 0};
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in) throw std::runtime_error(path.string() + ": truncated header");
  RealizationMatrix m(header[0], header[1]);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path.string() + ": truncated payload");
  }
  if (in.peek() != std::ifstream::traits_type::eof())
    throw std::runtime_error(path.string() + ": trailing bytes after payload");
  return m;
}

}  // namespace sbp
