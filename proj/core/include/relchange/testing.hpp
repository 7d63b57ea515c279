#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "relchange/excess.hpp"
#include "relchange/kernels.hpp"
#include "relchange/lrv.hpp"
#include "relchange/regression.hpp"
#include "relchange/series.hpp"

namespace relchange {

enum class Side { kPlus, kMinus, kTwoSided };
enum class BandwidthMode { kFixed, kGcv };
enum class LrvMode { kDefault, kFixed, kAuto };

std::string to_string(Side side);
Side side_from_string(const std::string& name);

struct TestConfig {
  double level_c = 1.0;
  double delta = 0.1;
  double alpha = 0.05;
  Side side = Side::kPlus;

  BandwidthMode bandwidth_mode = BandwidthMode::kGcv;
  double bandwidth = 0.2;                      // used when bandwidth_mode is kFixed
  std::optional<std::size_t> covariance_band;  // GCV whitening band

  std::optional<std::size_t> knots;  // N, defaults to n
  std::optional<double> h_d;         // defaults to N^(-1/2) / 2

  LrvMode lrv_mode = LrvMode::kDefault;
  LrvTuning lrv_tuning;  // used when lrv_mode is kFixed

  Kernel kernel = Kernel::epanechnikov();    // regression and LRV kernel
  Kernel k_d = Kernel::epanechnikov();       // smoothed indicator

  /// Throws ConfigError unless c > 0, delta in (0, 1) and alpha in (0, 0.5].
  void validate() const;

  ExcessConfig excess_config(std::size_t n, double b_n) const;
};

struct TestOutcome {
  double statistic = 0.0;  // n N b h_d (T - delta)
  double v_bar = 0.0;
  double quantile = 0.0;
  double p_value = 1.0;
  bool reject = false;
  bool degenerate_variance = false;
  ExcessEstimate estimate;
  ExcessEstimate uncorrected;  // same statistics on the plain local linear fit
  double bandwidth = 0.0;
  LrvTuning lrv_tuning;
  TestConfig config;

  /// The excess measure the hypothesis is about, chosen by config.side.
  double tested_excess() const;
};

/// {statistic, v_bar, quantile, p_value, reject, t_plus, t_minus, config}.
/// Numbers round-trip exactly.
std::string to_json(const TestOutcome& outcome);

/// Multiplier variance of the scaled statistic,
///   sum_j s2[j] (sum_i w_i K*((i/N - j/n)/b) - Kbar*(j/(nb)) sum_i w_i)^2,
/// with weights w_i = K_d(a_i^+) (plus side), -K_d(a_i^-) (minus side) or
/// their sum (two-sided), where a_i^{+/-} = (mu(i/N) - mu(0) -/+ c)/h_d on the
/// bias-corrected fit. `sigma2_at_design[j-1]` is the long-run variance at
/// j/n, so n = sigma2_at_design.size(). Only the nonzero terms are visited.
double v_bar(const MeanFit& fit, std::span<const double> sigma2_at_design,
             const ExcessConfig& config, Side side);

/// Same, reading the long-run variance at j/n from a curve.
double v_bar(const MeanFit& fit, const LrvCurve& lrv, std::size_t n, const ExcessConfig& config,
             Side side);

/// Decision from the scaled statistic and its multiplier variance. When
/// v_bar == 0 the quantile is 0, the p-value is 0 or 1 and
/// degenerate_variance is set.
void decide(TestOutcome& outcome, double alpha);

/// Jackknife fit, excess estimate, long-run variance and the normal
/// multiplier quantile.
TestOutcome run_test(const TimeSeries& series, const TestConfig& config);

/// LRV tuning the test would use for this series.
LrvTuning resolve_lrv_tuning(const TimeSeries& series, const TestConfig& config);

/// Regression bandwidth the test would use for this series.
double resolve_bandwidth(const TimeSeries& series, const TestConfig& config);

}  // namespace relchange
