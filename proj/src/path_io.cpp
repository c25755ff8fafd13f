#include "deou/path_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

namespace deou {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end && std::isfinite(out);
}

bool split_row(std::string_view line, double& t, double& x) {
  const auto comma = line.find(',');
  if (comma == std::string_view::npos) return false;
  const auto rest = line.substr(comma + 1);
  if (rest.find(',') != std::string_view::npos) return false;
  return parse_number(line.substr(0, comma), t) && parse_number(rest, x);
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

void write_path_csv(const SamplePath& path, std::ostream& out) {
  out << "t,x\n";
  for (std::size_t j = 0; j < path.values.size(); ++j) {
    out << format_double(static_cast<double>(j + 1) * path.h) << ',' << format_double(path.values[j])
        << '\n';
  }
}

SamplePath read_path_csv(std::istream& in) {
  std::vector<double> times;
  SamplePath path;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    double t = 0.0;
    double x = 0.0;
    if (!split_row(view, t, x)) {
      if (first_content) {  // header
        first_content = false;
        continue;
      }
      throw PathFormatError("malformed row " + std::to_string(times.size()) + " (line " +
                                std::to_string(line_no) + "): expected two numeric columns",
                            times.size(), line_no);
    }
    first_content = false;
    const std::size_t row = times.size();
    if (row >= 2) {
      const double step = t - times.back();
      if (std::fabs(step - path.h) > 1e-9 * path.h) {
        throw PathFormatError("non-uniform spacing at row " + std::to_string(row) + " (line " +
                                  std::to_string(line_no) + ")",
                              row, line_no);
      }
    } else if (row == 1) {
      path.h = t - times.front();
      if (!(path.h > 0.0)) {
        throw PathFormatError("time column must be strictly increasing (row 1, line " +
                                  std::to_string(line_no) + ")",
                              row, line_no);
      }
    }
    times.push_back(t);
    path.values.push_back(x);
  }
  if (path.values.size() < 2) {
    throw PathFormatError("need at least two observations to infer the spacing", path.values.size(),
                          line_no);
  }
  path.x0 = path.values.front();
  return path;
}

}  // namespace deou
