#include "csv_input.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "relchange/error.hpp"

namespace relchange::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool is_time_column(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return name == "t";
}

}  // namespace

CsvTable parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    fail(ErrorCode::kEmptyInput, "missing header row");
  }
  const auto header = split(line);
  const bool skip_first = is_time_column(header.front());
  CsvTable table;
  table.columns.assign(header.begin() + (skip_first ? 1 : 0), header.end());
  if (table.columns.empty()) fail(ErrorCode::kParseError, "header has no value columns");

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      fail(ErrorCode::kParseError, "row " + std::to_string(row) + ": expected " +
                                       std::to_string(header.size()) + " cells, found " +
                                       std::to_string(cells.size()));
    }
    for (std::size_t k = skip_first ? 1 : 0; k < cells.size(); ++k) {
      const std::string& cell = cells[k];
      double value = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size() ||
          !std::isfinite(value)) {
        fail(ErrorCode::kParseError, "row " + std::to_string(row) + ", column '" + header[k] +
                                         "': not a finite number: '" + cell + "'");
      }
      table.values.push_back(value);
    }
  }
  if (row == 0) fail(ErrorCode::kEmptyInput, "no data rows");
  table.rows = row;
  return table;
}

Dataset ingest_csv(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) fail(ErrorCode::kConfigError, "cannot open input file '" + path.string() + "'");
  CsvTable table = parse_csv(file);
  if (table.columns.size() == 1) return TimeSeries(std::move(table.values));
  return MultiSeries(table.rows, table.columns.size(), std::move(table.values));
}

}  // namespace relchange::cli
