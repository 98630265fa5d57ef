#include "specfilt/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "specfilt/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "basis-vector files are little-endian; big-endian hosts need byte swaps");

namespace specfilt {

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

void write_doubles(const std::string& path, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw DataError("write failed: " + path);
}

std::vector<double> read_doubles(const std::string& path, std::size_t expect_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::vector<double> v(expect_count);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(expect_count * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(expect_count * sizeof(double)))
    throw DataError(path + ": truncated (expected " + std::to_string(expect_count) + " doubles)");
  return v;
}

}  // namespace specfilt
