#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "relchange/series.hpp"
#include "relchange/testing.hpp"

namespace relchange {

/// Locally stationary tvAR(1) errors scale * G(t, F_i) with
/// G(t, F_i) = a(t) G(t, F_{i-1}) + eta_i, sampled through the MA(inf)
/// representation truncated after `truncation` lags.
struct ErrorModel {
  std::string name;
  std::function<double(double)> coefficient;  // a(t), |a| < 1
  double scale = 1.0;
  std::size_t truncation = 0;

  /// Picks the truncation so that sup_abs^truncation < 1e-12.
  static ErrorModel tvar(std::string name, std::function<double(double)> coefficient,
                         double scale, double sup_abs);
};

ErrorModel error_model_i();    // a(t) = 0.25 |sin(2 pi t)|, scale 1/5
ErrorModel error_model_ii();   // a(t) = 0.6 (1 - 4 (t - 0.5)^2), scale 1/5
ErrorModel error_model_iid(double scale);

/// "I", "II" or "iid" (scale 1/4). Throws ConfigError otherwise.
ErrorModel error_model_by_name(const std::string& name);

std::size_t truncation_for(double sup_abs);

struct MeanModel {
  std::string name;
  std::function<double(double)> mu;
};

MeanModel mean_model_a();              // 8 t (1 - t)
MeanModel mean_model_b();              // sin(2 pi |t - 0.6|) (1 + 0.4 t)
MeanModel mean_model_iii();            // 2.5 sin(pi t)
MeanModel mean_model_iv();             // 0, 1.25, 2.5 on the thirds of [0, 1]
MeanModel mean_model_power(double a);  // a (0.25 - (t - 0.5)^2)

/// "a", "b", "III", "IV" or "power:<a>". Throws ConfigError otherwise.
MeanModel mean_model_by_name(const std::string& name);

/// X_i = mu(i/n) + scale * sum_{k=0}^{K} a(i/n)^k eta_{i-k}. The generator
/// draws eta_1..eta_n first and then eta_0, eta_-1, ..., so raising the
/// truncation only appends draws.
TimeSeries simulate_series(const MeanModel& mean, const ErrorModel& error, std::size_t n,
                           std::uint64_t seed);

/// scale^2 / (1 - a(t))^2.
double true_lrv(const ErrorModel& error, double t);

struct McReport {
  std::string label;
  std::size_t n = 0;
  std::size_t replications = 0;
  double rejection_rate = 0.0;
  double target = 0.0;  // excess measure of the true mean
  double bias = 0.0;    // bias-corrected estimator
  double sd = 0.0;
  double bias_uncorrected = 0.0;
  double sd_uncorrected = 0.0;
  double mean_bandwidth = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> replication_seeds;
  TestConfig config;
};

/// Excess measure of a known mean on the side the config tests, evaluated
/// with 1e5 knots and h_d = 1e-4.
double analytic_excess(const MeanModel& mean, double level_c, Side side);

/// Replication r uses derive_seed(seed, r). Throws InvalidArgument when
/// reps < 100.
McReport run_level_experiment(const MeanModel& mean, const ErrorModel& error, std::size_t n,
                              const TestConfig& config, std::size_t reps, std::uint64_t seed);

struct ExperimentCell {
  MeanModel mean;
  ErrorModel error;
  std::size_t n = 500;
  TestConfig config;
};

struct SweepPoint {
  double value;
  McReport report;
};

/// One level experiment per grid value, grid point k seeded with
/// derive_seed(seed, k).
std::vector<SweepPoint> run_sweep(std::span<const double> values,
                                  const std::function<ExperimentCell(double)>& make_cell,
                                  std::size_t reps, std::uint64_t seed);

/// Power against the family a (0.25 - (t - 0.5)^2) over `coefficients`.
std::vector<SweepPoint> run_power_curve(std::span<const double> coefficients,
                                        const ErrorModel& error, std::size_t n,
                                        const TestConfig& config, std::size_t reps,
                                        std::uint64_t seed);

}  // namespace relchange
