#include "specnoise/csv.hpp"

#include <charconv>
#include <cstdio>

#include "specnoise/error.hpp"

namespace specnoise {

std::string csv_cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

std::string csv_cell(std::int64_t v) { return std::to_string(v); }
std::string csv_cell(std::uint64_t v) { return std::to_string(v); }

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw InvalidInput("csv: empty header");
  add_row(header_);
  rows_ = 0;
}

void CsvWriter::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw InvalidInput("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(header_.size()));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].find_first_of(",\n\r\"") != std::string::npos) {
      throw InvalidInput("csv: cell contains a delimiter: " + cells[i]);
    }
    if (i) out_ += ',';
    out_ += cells[i];
  }
  out_ += '\n';
  ++rows_;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InvalidInput("csv: no column named " + std::string(name));
}

std::vector<double> CsvTable::numeric(std::string_view name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const std::string& s = r[c];
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw InvalidInput("csv: column " + std::string(name) + " holds a non-numeric cell: " + s);
    }
    out.push_back(v);
  }
  return out;
}

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    auto cells = split(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
    } else if (cells.size() != table.header.size()) {
      throw InvalidInput("csv: line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                         " cells, expected " + std::to_string(table.header.size()));
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  if (table.header.empty()) throw InvalidInput("csv: empty document");
  return table;
}

}  // namespace specnoise
