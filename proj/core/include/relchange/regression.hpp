#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "relchange/kernels.hpp"
#include "relchange/series.hpp"

namespace relchange {

struct LocalLinearEstimate {
  double mu;
  double slope;
};

/// Kernel-weighted least squares fit of an intercept and slope around t.
///
/// Near the boundaries the truncated kernel weights are used as they are;
/// there is no boundary kernel. Throws DegenerateWindow when b < 2/n or when
/// the weighted 2x2 design is numerically singular.
LocalLinearEstimate local_linear(const TimeSeries& series, double t, double bandwidth,
                                 const Kernel& kernel);

/// Mean curve evaluated on a query grid.
///
/// mu_tilde is the Jackknife combination 2 muhat_{b/sqrt2} - muhat_b;
/// mu_hat is the plain local linear fit at bandwidth b.
struct MeanFit {
  std::vector<double> query_grid;
  std::vector<double> mu_tilde;
  std::vector<double> mu_hat;
  double bandwidth = 0.0;
  Kernel kernel = Kernel::epanechnikov();
};

MeanFit jackknife_fit(const TimeSeries& series, std::span<const double> query_grid,
                      double bandwidth, const Kernel& kernel);

/// A fit whose corrected and uncorrected curves both equal `mu` on the grid.
/// Used to plug the true mean into the excess statistics.
MeanFit plug_in_fit(const std::function<double(double)>& mu, std::span<const double> query_grid,
                    double bandwidth = 0.0);

/// {0, 1/N, ..., 1}: the anchor point 0 followed by the Riemann knots i/N.
std::vector<double> anchor_grid(std::size_t knots);

/// {1/n, ..., 1}: the design points of a series of length n.
std::vector<double> design_grid(std::size_t n);

/// Symmetric banded Toeplitz estimate of the error covariance, with a ridge
/// added to the diagonal until it is positive definite.
class BandedCovariance {
 public:
  std::size_t size() const noexcept { return n_; }
  std::size_t band_width() const noexcept { return autocov_.size() - 1; }
  double ridge() const noexcept { return ridge_; }
  std::span<const double> autocovariances() const noexcept { return autocov_; }

  double entry(std::size_t i, std::size_t j) const noexcept;

  /// Solves (Gamma + ridge I) x = rhs with the stored band Cholesky factor.
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  friend BandedCovariance banded_covariance(std::span<const double>, std::size_t);

  std::size_t n_ = 0;
  std::vector<double> autocov_;
  double ridge_ = 0.0;
  std::vector<double> factor_;  // LAPACK lower band storage, (band + 1) x n
};

/// Entry (i, j) is the lag-|i-j| sample autocovariance for |i-j| <= band.
/// The ridge is the smallest of 0, 1e-8, 1e-6, ... making the matrix
/// positive definite.
BandedCovariance banded_covariance(std::span<const double> residuals, std::size_t band);

/// floor(n^(1/3)).
std::size_t default_covariance_band(std::size_t n);

/// 15 log-spaced bandwidths in [max(0.05, 4/n), 0.4].
std::vector<double> default_gcv_candidates(std::size_t n);

struct GcvOptions {
  std::optional<std::size_t> band;  // defaults to default_covariance_band(n)
};

struct GcvScore {
  double bandwidth;
  double score;  // +inf for degenerate candidates
};

struct GcvResult {
  double bandwidth;
  double pilot_bandwidth;
  std::vector<GcvScore> scores;
};

/// Generalized cross validation over Jackknife residuals, whitened by a
/// banded covariance estimate.
///
/// Two passes: the first scores every candidate against the covariance of
/// its own residuals and yields a pilot bandwidth; the second rescores all
/// candidates against the covariance of the pilot residuals. Ties go to the
/// smaller bandwidth. Throws AllCandidatesDegenerate if no candidate can be
/// scored.
GcvResult gcv_select(const TimeSeries& series, std::span<const double> candidates,
                     const Kernel& kernel, const GcvOptions& options = {});

inline double gcv_bandwidth(const TimeSeries& series, std::span<const double> candidates,
                            const Kernel& kernel, const GcvOptions& options = {}) {
  return gcv_select(series, candidates, kernel, options).bandwidth;
}

}  // namespace relchange
