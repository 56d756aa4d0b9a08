#include "fluxlattice/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace fluxlattice {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::vector<CsvCell> cells(header.begin(), header.end());
  row(cells);
  rows_ = 0;
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  if (cells.size() != columns_) {
    throw std::invalid_argument("CSV row has " + std::to_string(cells.size()) +
                                " cells, expected " + std::to_string(columns_));
  }
  std::string line;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) line += ',';
    if (const auto* d = std::get_if<double>(&cells[k])) {
      line += format_double(*d);
    } else if (const auto* i = std::get_if<std::int64_t>(&cells[k])) {
      line += std::to_string(*i);
    } else {
      line += quote(std::get<std::string>(cells[k]));
    }
  }
  line += '\n';
  out_ << line;
  ++rows_;
}

void CsvWriter::close() {
  out_.flush();
  if (!out_) throw std::runtime_error("write failed for " + path_.string());
  out_.close();
}

}  // namespace fluxlattice
