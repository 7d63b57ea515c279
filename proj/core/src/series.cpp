#include "relchange/series.hpp"

#include <cmath>
#include <string>

#include "relchange/error.hpp"

namespace relchange {

TimeSeries::TimeSeries(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < kMinLength) {
    fail(ErrorCode::kInvalidArgument, "series needs at least " + std::to_string(kMinLength) +
                                          " observations, got " + std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      fail(ErrorCode::kInvalidArgument, "non-finite observation at index " + std::to_string(i));
    }
  }
}

MultiSeries::MultiSeries(std::size_t rows, std::size_t dims, std::vector<double> values)
    : rows_(rows), dims_(dims), values_(std::move(values)) {
  if (dims_ == 0) fail(ErrorCode::kInvalidArgument, "multivariate series needs m >= 1");
  if (rows_ < TimeSeries::kMinLength) {
    fail(ErrorCode::kInvalidArgument, "series needs at least 10 observations");
  }
  if (values_.size() != rows_ * dims_) {
    fail(ErrorCode::kInvalidArgument, "value count does not match rows x dims");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "non-finite observation");
  }
}

TimeSeries MultiSeries::component(std::size_t dim) const {
  std::vector<double> column(rows_);
  for (std::size_t i = 0; i < rows_; ++i) column[i] = at(i, dim);
  return TimeSeries(std::move(column));
}

}  // namespace relchange
