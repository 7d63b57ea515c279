#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "relchange/kernels.hpp"
#include "relchange/regression.hpp"

namespace relchange {

/// Smoothing setup of the excess statistics.
struct ExcessConfig {
  double level_c = 1.0;
  std::size_t knots = 0;   // N, number of Riemann knots i/N
  double h_d = 0.0;        // bandwidth of the smoothed indicator
  double b_n = 0.0;        // regression bandwidth; 0 marks a plug-in fit
  Kernel kernel = Kernel::epanechnikov();  // K_d

  /// N = n and h_d = N^(-1/2) / 2.
  static ExcessConfig with_defaults(double level_c, std::size_t n, double b_n);

  /// Throws InvalidArgument on c <= 0, N == 0, h_d <= 0, or h_d > b_n (b_n > 0).
  void validate() const;
};

double default_hd(std::size_t knots);

struct ExcessEstimate {
  double t_plus = 0.0;
  double t_minus = 0.0;
  double t_total = 0.0;
  ExcessConfig config;
};

/// int_c^inf (1/h) K_d((v - u)/h) du = cdf_{K_d}((v - c)/h).
inline double smooth_indicator_plus(double v, double c, double h_d, const Kernel& k_d) {
  return k_d.cdf((v - c) / h_d);
}

/// Smoothed excess measures of a curve sampled on anchor_grid(N); curve[0]
/// is the value at t = 0 and curve[i] the value at i/N.
ExcessEstimate estimate_excess(std::span<const double> curve, const ExcessConfig& config);

/// Same statistics on the bias-corrected curve of `fit`, which must be
/// evaluated on anchor_grid(config.knots).
ExcessEstimate estimate_excess(const MeanFit& fit, const ExcessConfig& config);

/// The same Riemann sums with the true mean plugged in.
ExcessEstimate deterministic_excess_estimate(const std::function<double(double)>& mu,
                                             const ExcessConfig& config);

/// T+_{N,c} of the true mean.
inline double deterministic_excess(const std::function<double(double)>& mu,
                                   const ExcessConfig& config) {
  return deterministic_excess_estimate(mu, config).t_plus;
}

/// Time in [t0, 1] where the fit exceeds its average over [0, t0] by more
/// than c. The average is (1/t0) times the trapezoid integral of mu_tilde.
/// Throws InvalidWindow unless 0 < t0 < 1.
double excess_vs_average_trend(const MeanFit& fit, double t0, const ExcessConfig& config);

/// Two-sided excess of |(mu(t) - mu(0)) / mu(0)| above c. Throws ZeroBaseline
/// when |mu_tilde(0)| <= baseline_floor.
double relative_excess(const MeanFit& fit, const ExcessConfig& config,
                       double baseline_floor = 1e-8);

/// Lebesgue measure of {t in [0,1] : |mu(t) - level| <= delta}, measured on
/// a uniform grid with `resolution` cells.
double level_band_measure(const std::function<double(double)>& mu, double level, double delta,
                          std::size_t resolution = 1'000'000);

}  // namespace relchange
