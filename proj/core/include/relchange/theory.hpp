#pragma once

#include <array>
#include <functional>
#include <span>

#include "relchange/kernels.hpp"

namespace relchange {

/// Root of mu(t) - mu(0) = +/-c with nonzero slope.
struct RegularRoot {
  double t;
  double slope;      // mu'(t)
  double curvature;  // mu''(t)
};

struct RegularVariance {
  double tau1_sq;  // interior part
  double tau2_sq;  // contribution of the fit at 0
  double bias;     // leading bias of the uncorrected estimator
};

/// Limiting variance and bias of sqrt(n b)(That - T) when every root is
/// regular. `lrv` is the long-run variance function, `mu0_curvature` is
/// mu''(0) and `bandwidth` the regression bandwidth b entering the b^2 bias.
/// Throws ZeroDerivative if a root has zero slope.
RegularVariance theoretical_variance_regular(std::span<const RegularRoot> roots,
                                             double mu0_curvature,
                                             const std::function<double(double)>& lrv,
                                             const Kernel& kernel, double bandwidth);

/// Root of critical order v: the first v derivatives vanish and
/// `derivative` is mu^(v+1)(t).
struct CriticalRoot {
  double t;
  int order;
  double derivative;
};

enum class BandwidthRegime {
  kSmoothIndicatorNegligible,  // b^(v+1) / h_d -> infinity
  kBalanced,                   // b / h_d^(1/(v+1)) -> ratio
};

struct SideVariance {
  double first = 0.0;   // interior term
  double second = 0.0;  // term from the fit at 0
  int max_order = -1;   // -1 when the side has no roots
};

struct CriticalVariance {
  SideVariance plus;
  SideVariance minus;
  /// Joint covariance of the scaled (T+, T-) errors. The cross term is only
  /// available in the first regime; it is NaN in the balanced one.
  std::array<std::array<double, 2>, 2> sigma{};
};

/// Limiting covariance of the bias-corrected excess estimators with roots of
/// arbitrary critical order. Only roots of maximal order on each side enter.
/// In the balanced regime the second term is divided by `ratio` and is
/// infinite for ratio == 0.
CriticalVariance theoretical_variance_critical(std::span<const CriticalRoot> roots_plus,
                                               std::span<const CriticalRoot> roots_minus,
                                               const std::function<double(double)>& lrv,
                                               const Kernel& kernel, const Kernel& k_d,
                                               BandwidthRegime regime, double ratio = 0.0);

/// int_{-1}^{1} K_d(z^(v+1)) dz.
double power_indicator_integral(const Kernel& k_d, int order);

/// int (K*)^2 over [-1, 1] and int (Kbar*)^2 over [0, 1].
double interior_kernel_energy(const Kernel& kernel);
double boundary_kernel_energy(const Kernel& kernel);

}  // namespace relchange
