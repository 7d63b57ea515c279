#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "relchange/kernels.hpp"
#include "relchange/series.hpp"

namespace relchange {

struct LrvTuning {
  std::size_t block = 2;  // m
  double tau = 0.5;       // smoothing bandwidth
};

/// Pointwise long-run variance estimates on a grid.
struct LrvCurve {
  std::vector<double> grid;
  std::vector<double> sigma2;
  std::size_t block = 0;
  double tau = 0.0;

  /// Linear interpolation on the grid, constant beyond its ends.
  double at(double t) const;
};

/// Difference-based estimator built from the block differences
/// D_j = (S_{j-m+1..j} - S_{j+1..j+m}) / m, defined for m <= j <= n - m.
///
/// sigma2(t) = sum_j (m D_j^2 / 2) w(t, j) with kernel weights normalized
/// over the admissible j only. For t outside [m/n, 1 - m/n] the value at the
/// nearest end of that interval is used.
class DifferenceLrv {
 public:
  /// Throws InvalidTuning unless 2 <= m <= n/4 and m/n < tau < 0.5.
  DifferenceLrv(const TimeSeries& series, std::size_t block, double tau, Kernel kernel);

  double operator()(double t) const;
  LrvCurve evaluate(std::span<const double> grid) const;

  std::size_t block() const noexcept { return block_; }
  double tau() const noexcept { return tau_; }

 private:
  std::size_t n_;
  std::size_t block_;
  double tau_;
  Kernel kernel_;
  std::vector<double> terms_;  // m D_j^2 / 2 for j = m..n-m
  // Epanechnikov only: prefix sums of x^p and x^p T_j, x = (j - m)/n, p = 0..2.
  std::array<std::vector<double>, 3> moment_prefix_;
  std::array<std::vector<double>, 3> term_prefix_;

  double epanechnikov_at(double t) const;
};

LrvCurve lrv_estimate(const TimeSeries& series, std::size_t block, double tau,
                      const Kernel& kernel, std::span<const double> grid);

/// m = max(2, floor(n^(2/7))), tau = min(n^(-1/7), 0.49).
LrvTuning default_tuning(std::size_t n);

/// {2, ..., ceil(3 n^(2/7))}, capped at n/4.
std::vector<std::size_t> default_block_grid(std::size_t n);

/// 10 log-spaced values in [1.5 max_block / n, 0.49].
std::vector<double> default_tau_grid(std::size_t n, std::size_t max_block);

struct MinimalVolatilityResult {
  LrvTuning tuning;
  std::vector<double> ise;        // row-major over (block, tau)
  std::vector<double> criterion;  // ise + 2 (tau + m/n) * mean(ise)
};

/// Minimal volatility selection of (m, tau).
///
/// For each cell the local variability is the mean, over 101 points in
/// [gamma, 1 - gamma] with gamma = tau + m/n, of the pointwise variance of
/// the estimates at the neighbouring cells (m, tau_{j+r}) and (m_{h+r}, tau),
/// r in -2..2, truncated at the grid edges. Ties resolve to the smaller m,
/// then the smaller tau. Throws GridTooSmall if either grid has < 5 entries.
MinimalVolatilityResult minimal_volatility_select(const TimeSeries& series,
                                                  std::span<const std::size_t> block_grid,
                                                  std::span<const double> tau_grid,
                                                  const Kernel& kernel);

inline LrvTuning minimal_volatility_tuning(const TimeSeries& series,
                                           std::span<const std::size_t> block_grid,
                                           std::span<const double> tau_grid,
                                           const Kernel& kernel) {
  return minimal_volatility_select(series, block_grid, tau_grid, kernel).tuning;
}

}  // namespace relchange
