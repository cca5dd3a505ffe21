#include "envara/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace envara {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_) throw std::logic_error("csv row width mismatch in " + path_);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    const Cell& c = cells[i];
    if (const auto* l = std::get_if<long>(&c))
      out_ << *l;
    else if (const auto* d = std::get_if<double>(&c))
      out_ << format_real(*d);
    else if (const auto* s = std::get_if<std::string>(&c))
      out_ << *s;
  }
  out_ << '\n';
  if (!out_) throw std::runtime_error("write failed: " + path_);
}

}  // namespace envara
