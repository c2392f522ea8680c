#pragma once

// Comma-separated tables: header row, LF line endings, doubles printed with
// 17 significant digits so that every value round-trips exactly.

#include <concepts>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace specnoise {

std::string csv_cell(double v);
std::string csv_cell(std::int64_t v);
std::string csv_cell(std::uint64_t v);
inline std::string csv_cell(int v) { return csv_cell(static_cast<std::int64_t>(v)); }
inline std::string csv_cell(long long v) { return csv_cell(static_cast<std::int64_t>(v)); }
inline std::string csv_cell(std::string v) { return v; }

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  template <typename... Cells>
  void row(const Cells&... cells) {
    add_row({csv_cell(cells)...});
  }
  void add_row(std::vector<std::string> cells);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_; }
  const std::string& str() const { return out_; }

 private:
  std::vector<std::string> header_;
  std::string out_;
  std::size_t rows_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column; throws InvalidInput if absent.
  std::size_t column(std::string_view name) const;
  std::vector<double> numeric(std::string_view name) const;
};

/// Parses the dialect written by CsvWriter (no quoting). Throws InvalidInput
/// on ragged rows or an empty document.
CsvTable parse_csv(std::string_view text);

}  // namespace specnoise
