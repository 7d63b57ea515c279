#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "relchange/series.hpp"

namespace relchange::cli {

struct CsvTable {
  std::vector<std::string> columns;   // value columns, a leading `t` column dropped
  std::vector<double> values;         // row-major
  std::size_t rows = 0;
};

/// One header row, comma separated. A column named `t` is ignored. Empty,
/// non-numeric or non-finite cells raise ParseError naming the data row
/// (1-based, header excluded) and the column; a file without data rows
/// raises EmptyInput.
CsvTable parse_csv(std::istream& in);

using Dataset = std::variant<TimeSeries, MultiSeries>;

/// One value column gives a TimeSeries, several give a MultiSeries.
Dataset ingest_csv(const std::filesystem::path& path);

}  // namespace relchange::cli
