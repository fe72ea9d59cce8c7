#pragma once
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace droplet {

// RFC-4180 CSV: header row, '.' decimal separator, LF line endings
class CsvWriter {
public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();
  void row(const std::vector<double>& vals);
  void row(const std::vector<std::string>& cells);
  void close();
  const std::string& path() const { return path_; }

  static std::string format(double v); // %.17g, stable across runs

private:
  std::string path_;
  std::ofstream out_;
};

std::uint64_t fnv1a64_file(const std::string& path);
std::string to_hex(std::uint64_t v);

} // namespace droplet
