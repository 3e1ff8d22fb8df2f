#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sbp {

/// Malformed input data. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

namespace csv {

std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<std::uint64_t> parse_uint(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

/// Shortest representation that round-trips through parse_double.
std::string format_double(double v);

/// Reads the next non-blank, non-comment ('#') line. `line_no` is the
/// 1-based number of the returned line.
bool next_record(std::istream& in, std::string& line, std::size_t& line_no);

}  // namespace csv
}  // namespace sbp
