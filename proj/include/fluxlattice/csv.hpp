#pragma once

// Minimal locale-independent CSV writer (UTF-8, header row, '.' decimals).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace fluxlattice {

using CsvCell = std::variant<double, std::int64_t, std::string>;

/// Shortest round-trip decimal form of x ("nan", "inf", "-inf" otherwise).
std::string format_double(double x);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  void row(const std::vector<CsvCell>& cells);
  std::size_t rows_written() const noexcept { return rows_; }
  /// Flushes and closes; throws std::runtime_error on I/O failure.
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
  std::size_t rows_ = 0;
};

}  // namespace fluxlattice
