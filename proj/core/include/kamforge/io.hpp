#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace kamforge::io {

/// Shortest text that round-trips for typical values: %.17g.
std::string format_double(double v);

std::uint64_t fnv1a(std::string_view text);
/// 16 hex digits of fnv1a(text).
std::string hash_hex(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

/// CSV with a "# config_hash=<hash>" comment line, then a header row.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& hash, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::size_t columns_;
  std::ofstream out_;
};

}  // namespace kamforge::io
