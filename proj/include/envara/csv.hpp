#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

namespace envara {

/// Comma-separated output with a header row, LF line endings and reals
/// printed with 17 significant digits. A std::monostate cell is written
/// empty.
class CsvWriter {
 public:
  using Cell = std::variant<std::monostate, long, double, std::string>;

  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void row(const std::vector<Cell>& cells);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t columns_;
};

std::string format_real(double v);

}  // namespace envara
