#pragma once

// Two-column "t,x" CSV ingestion and export for sample paths.

#include "deou/simulate.hpp"

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace deou {

// Parse or spacing failure. `row` is the 0-based data row (header excluded)
// and `line` the 1-based line number in the file.
class PathFormatError : public std::runtime_error {
 public:
  PathFormatError(const std::string& what, std::size_t row, std::size_t line)
      : std::runtime_error(what), row_(row), line_(line) {}

  std::size_t row() const { return row_; }
  std::size_t line() const { return line_; }

 private:
  std::size_t row_;
  std::size_t line_;
};

// Writes the header `t,x` and one row per observation with t = j h,
// j = 1..n, all numbers with 17 significant digits.
void write_path_csv(const SamplePath& path, std::ostream& out);

// Reads a `t,x` CSV. A non-numeric first line is treated as a header. The
// spacing is taken from the first two rows and every later increment must
// match it to within 1e-9 h.
SamplePath read_path_csv(std::istream& in);

std::string format_double(double value);

}  // namespace deou
