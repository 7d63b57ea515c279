#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace relchange {

/// Observations X_1, ..., X_n on the design grid i/n.
class TimeSeries {
 public:
  static constexpr std::size_t kMinLength = 10;

  /// Throws InvalidArgument when n < 10 or a value is not finite.
  explicit TimeSeries(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

  /// Zero-based access: operator[](i) is X_{i+1}.
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  /// Rescaled time of the zero-based observation i, (i + 1) / n.
  double time(std::size_t i) const noexcept {
    return static_cast<double>(i + 1) / static_cast<double>(values_.size());
  }

 private:
  std::vector<double> values_;
};

/// n observations of an m-dimensional series, stored row-major.
class MultiSeries {
 public:
  MultiSeries(std::size_t rows, std::size_t dims, std::vector<double> values);

  std::size_t size() const noexcept { return rows_; }
  std::size_t dims() const noexcept { return dims_; }
  double at(std::size_t row, std::size_t dim) const noexcept {
    return values_[row * dims_ + dim];
  }
  TimeSeries component(std::size_t dim) const;

 private:
  std::size_t rows_;
  std::size_t dims_;
  std::vector<double> values_;
};

}  // namespace relchange
