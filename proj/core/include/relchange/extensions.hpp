#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "relchange/excess.hpp"
#include "relchange/lrv.hpp"
#include "relchange/regression.hpp"
#include "relchange/series.hpp"
#include "relchange/testing.hpp"

namespace relchange {

/// (1/N) sum_i cdf((|mu(i/N) - mu(0)|^2 - c^2) / h_d) over the bias-corrected
/// coordinate fits. h_d acts on the squared-norm scale.
double multivariate_excess(std::span<const MeanFit> fits, const ExcessConfig& config);

struct LrvMatrixCurve {
  std::vector<double> grid;
  std::vector<Eigen::MatrixXd> matrices;  // symmetric, eigenvalues clipped at 0
  LrvTuning tuning;
};

/// Entrywise analogue of the difference-based estimator with vector block
/// differences, projected onto the PSD cone.
LrvMatrixCurve lrv_matrix_estimate(const MultiSeries& series, const LrvTuning& tuning,
                                   const Kernel& kernel, std::span<const double> grid);

/// Symmetric PSD square root by eigendecomposition (negative eigenvalues
/// are treated as 0).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& matrix);

/// Relevant-change test for the squared distance of the mean vector from
/// its initial value. The quantile is the empirical (1 - alpha) quantile of
/// `mc_draws` Gaussian multiplier draws; v_bar reports their exact variance.
/// Throws InvalidArgument when mc_draws < 1000.
TestOutcome multivariate_test(const MultiSeries& series, const TestConfig& config,
                              std::size_t mc_draws = 2000, std::uint64_t seed = 0);

struct SojournEstimate {
  double expected;     // e_hat
  double probability;  // p_hat
};

/// Smoothed sojourn estimators from a fit on anchor_grid(N) and the residual
/// differences Z(i/n), i = 1..n.
SojournEstimate sojourn_estimators(const MeanFit& fit, std::span<const double> residual_diffs,
                                   const ExcessConfig& config, double delta);

/// e(i/n) - e(1/n) for the Jackknife residuals e = X - mu_tilde; the residual
/// at the first design point stands in for the one at 0.
std::vector<double> residual_differences(const TimeSeries& series, double bandwidth,
                                         const Kernel& kernel);

}  // namespace relchange
