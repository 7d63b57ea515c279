#include "relchange/simulate.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include "relchange/error.hpp"
#include "relchange/parallel.hpp"

namespace relchange {

std::size_t truncation_for(double sup_abs) {
  if (!(sup_abs >= 0.0 && sup_abs < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "tvAR coefficient must stay inside (-1, 1)");
  }
  if (sup_abs == 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log(sup_abs)));
}

ErrorModel ErrorModel::tvar(std::string name, std::function<double(double)> coefficient,
                            double scale, double sup_abs) {
  ErrorModel m;
  m.name = std::move(name);
  m.coefficient = std::move(coefficient);
  m.scale = scale;
  m.truncation = truncation_for(sup_abs);
  return m;
}

ErrorModel error_model_i() {
  return ErrorModel::tvar(
      "I", [](double t) { return 0.25 * std::abs(std::sin(2.0 * std::numbers::pi * t)); }, 0.2,
      0.25);
}

ErrorModel error_model_ii() {
  return ErrorModel::tvar(
      "II", [](double t) { return 0.6 * (1.0 - 4.0 * (t - 0.5) * (t - 0.5)); }, 0.2, 0.6);
}

ErrorModel error_model_iid(double scale) {
  return ErrorModel::tvar("iid", [](double) { return 0.0; }, scale, 0.0);
}

ErrorModel error_model_by_name(const std::string& name) {
  if (name == "I") return error_model_i();
  if (name == "II") return error_model_ii();
  if (name == "iid") return error_model_iid(0.25);
  fail(ErrorCode::kConfigError, "unknown error model '" + name + "'");
}

MeanModel mean_model_a() {
  return {"a", [](double t) { return 8.0 * (0.25 - (t - 0.5) * (t - 0.5)); }};
}

MeanModel mean_model_b() {
  return {"b", [](double t) {
            return std::sin(2.0 * std::abs(t - 0.6) * std::numbers::pi) * (1.0 + 0.4 * t);
          }};
}

MeanModel mean_model_iii() {
  return {"III", [](double t) { return 2.5 * std::sin(std::numbers::pi * t); }};
}

MeanModel mean_model_iv() {
  return {"IV", [](double t) {
            if (t < 1.0 / 3.0) return 0.0;
            if (t < 2.0 / 3.0) return 1.25;
            return 2.5;
          }};
}

MeanModel mean_model_power(double a) {
  std::ostringstream label;
  label << "power:" << a;
  return {label.str(), [a](double t) { return a * (0.25 - (t - 0.5) * (t - 0.5)); }};
}

MeanModel mean_model_by_name(const std::string& name) {
  if (name == "a") return mean_model_a();
  if (name == "b") return mean_model_b();
  if (name == "III") return mean_model_iii();
  if (name == "IV") return mean_model_iv();
  if (name.rfind("power:", 0) == 0) {
    try {
      std::size_t used = 0;
      const double a = std::stod(name.substr(6), &used);
      if (used == name.size() - 6) return mean_model_power(a);
    } catch (const std::exception&) {
    }
  }
  fail(ErrorCode::kConfigError, "unknown mean model '" + name + "'");
}

TimeSeries simulate_series(const MeanModel& mean, const ErrorModel& error, std::size_t n,
                           std::uint64_t seed) {
  if (n < TimeSeries::kMinLength) {
    fail(ErrorCode::kInvalidArgument, "n must be at least " + std::to_string(TimeSeries::kMinLength));
  }
  const std::size_t lags = error.truncation;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  // eta[lags + i - 1] holds eta_i for i = 1 - lags .. n.
  std::vector<double> eta(n + lags);
  for (std::size_t i = 0; i < n; ++i) eta[lags + i] = normal(rng);
  for (std::size_t k = 0; k < lags; ++k) eta[lags - 1 - k] = normal(rng);

  const double nd = static_cast<double>(n);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i + 1) / nd;
    const double a = error.coefficient(t);
    double noise = 0.0, power = 1.0;
    for (std::size_t k = 0; k <= lags; ++k) {
      noise += power * eta[lags + i - k];
      power *= a;
    }
    values[i] = mean.mu(t) + error.scale * noise;
  }
  return TimeSeries(std::move(values));
}

double true_lrv(const ErrorModel& error, double t) {
  const double a = error.coefficient(t);
  return error.scale * error.scale / ((1.0 - a) * (1.0 - a));
}

double analytic_excess(const MeanModel& mean, double level_c, Side side) {
  ExcessConfig cfg;
  cfg.level_c = level_c;
  cfg.knots = 100'000;
  cfg.h_d = 1e-4;
  const ExcessEstimate est = deterministic_excess_estimate(mean.mu, cfg);
  switch (side) {
    case Side::kPlus: return est.t_plus;
    case Side::kMinus: return est.t_minus;
    case Side::kTwoSided: return est.t_total;
  }
  return est.t_plus;
}

namespace {

double side_value(const ExcessEstimate& est, Side side) {
  switch (side) {
    case Side::kPlus: return est.t_plus;
    case Side::kMinus: return est.t_minus;
    case Side::kTwoSided: return est.t_total;
  }
  return est.t_plus;
}

struct Spread {
  double bias;
  double sd;
};

Spread spread(std::span<const double> values, double target) {
  const double count = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / count;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
  return {mean - target, std::sqrt(pairwise_sum(sq) / (count - 1.0))};
}

}  // namespace

McReport run_level_experiment(const MeanModel& mean, const ErrorModel& error, std::size_t n,
                              const TestConfig& config, std::size_t reps, std::uint64_t seed) {
  if (reps < 100) fail(ErrorCode::kInvalidArgument, "at least 100 replications are required");
  config.validate();

  McReport report;
  report.label = mean.name + "," + error.name;
  report.n = n;
  report.replications = reps;
  report.seed = seed;
  report.config = config;
  report.target = analytic_excess(mean, config.level_c, config.side);
  report.replication_seeds.resize(reps);
  for (std::size_t r = 0; r < reps; ++r) report.replication_seeds[r] = derive_seed(seed, r);

  std::vector<double> rejects(reps), corrected(reps), plain(reps), bandwidths(reps);
  parallel_for(reps, [&](std::size_t r) {
    const TimeSeries series = simulate_series(mean, error, n, report.replication_seeds[r]);
    const TestOutcome out = run_test(series, config);
    rejects[r] = out.reject ? 1.0 : 0.0;
    corrected[r] = side_value(out.estimate, config.side);
    plain[r] = side_value(out.uncorrected, config.side);
    bandwidths[r] = out.bandwidth;
  });

  const double count = static_cast<double>(reps);
  report.rejection_rate = pairwise_sum(rejects) / count;
  const Spread tilde = spread(corrected, report.target);
  const Spread hat = spread(plain, report.target);
  report.bias = tilde.bias;
  report.sd = tilde.sd;
  report.bias_uncorrected = hat.bias;
  report.sd_uncorrected = hat.sd;
  report.mean_bandwidth = pairwise_sum(bandwidths) / count;
  return report;
}

std::vector<SweepPoint> run_sweep(std::span<const double> values,
                                  const std::function<ExperimentCell(double)>& make_cell,
                                  std::size_t reps, std::uint64_t seed) {
  if (values.empty()) fail(ErrorCode::kInvalidArgument, "sweep grid is empty");
  std::vector<SweepPoint> points;
  points.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const ExperimentCell cell = make_cell(values[k]);
    points.push_back({values[k], run_level_experiment(cell.mean, cell.error, cell.n, cell.config,
                                                      reps, derive_seed(seed, k))});
  }
  return points;
}

std::vector<SweepPoint> run_power_curve(std::span<const double> coefficients,
                                        const ErrorModel& error, std::size_t n,
                                        const TestConfig& config, std::size_t reps,
                                        std::uint64_t seed) {
  return run_sweep(
      coefficients,
      [&](double a) { return ExperimentCell{mean_model_power(a), error, n, config}; }, reps,
      seed);
}

}  // namespace relchange
