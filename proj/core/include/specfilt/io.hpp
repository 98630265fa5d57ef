#pragma once

#include <cstdio>
#include <span>
#include <string>
#include <vector>

namespace specfilt {

/// Full round-trip formatting: 17 significant digits.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Little-endian raw doubles.
void write_doubles(const std::string& path, std::span<const double> values);
std::vector<double> read_doubles(const std::string& path, std::size_t expect_count);

}  // namespace specfilt
