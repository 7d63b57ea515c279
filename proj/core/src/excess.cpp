#include "relchange/excess.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "relchange/error.hpp"
#include "relchange/parallel.hpp"

namespace relchange {

double default_hd(std::size_t knots) { return 0.5 / std::sqrt(static_cast<double>(knots)); }

ExcessConfig ExcessConfig::with_defaults(double level_c, std::size_t n, double b_n) {
  ExcessConfig cfg;
  cfg.level_c = level_c;
  cfg.knots = n;
  cfg.h_d = default_hd(n);
  cfg.b_n = b_n;
  return cfg;
}

void ExcessConfig::validate() const {
  if (!(level_c > 0.0)) fail(ErrorCode::kInvalidArgument, "level c must be positive");
  if (knots == 0) fail(ErrorCode::kInvalidArgument, "N must be positive");
  if (!(h_d > 0.0)) fail(ErrorCode::kInvalidArgument, "h_d must be positive");
  if (b_n > 0.0 && h_d > b_n) {
    fail(ErrorCode::kInvalidArgument, "h_d = " + std::to_string(h_d) +
                                          " exceeds the regression bandwidth " +
                                          std::to_string(b_n));
  }
}

namespace {

void check_anchor_grid(std::span<const double> grid, std::size_t knots) {
  if (grid.size() != knots + 1 || grid.front() != 0.0 || std::abs(grid.back() - 1.0) > 1e-12) {
    fail(ErrorCode::kInvalidArgument, "fit must be evaluated on {0, 1/N, ..., 1} with N = " +
                                          std::to_string(knots));
  }
}

}  // namespace

ExcessEstimate estimate_excess(std::span<const double> curve, const ExcessConfig& config) {
  config.validate();
  const std::size_t big_n = config.knots;
  if (curve.size() != big_n + 1) {
    fail(ErrorCode::kInvalidArgument, "curve must hold N + 1 values");
  }
  const double c = config.level_c;
  const double h = config.h_d;
  const double origin = curve[0];
  std::vector<double> plus(big_n), minus(big_n);
  for (std::size_t i = 1; i <= big_n; ++i) {
    const double v = curve[i] - origin;
    plus[i - 1] = config.kernel.cdf((v - c) / h);
    minus[i - 1] = 1.0 - config.kernel.cdf((v + c) / h);
  }
  ExcessEstimate est;
  est.config = config;
  est.t_plus = pairwise_sum(plus) / static_cast<double>(big_n);
  est.t_minus = pairwise_sum(minus) / static_cast<double>(big_n);
  est.t_total = est.t_plus + est.t_minus;
  return est;
}

ExcessEstimate estimate_excess(const MeanFit& fit, const ExcessConfig& config) {
  check_anchor_grid(fit.query_grid, config.knots);
  return estimate_excess(fit.mu_tilde, config);
}

ExcessEstimate deterministic_excess_estimate(const std::function<double(double)>& mu,
                                             const ExcessConfig& config) {
  std::vector<double> curve(config.knots + 1);
  for (std::size_t i = 0; i <= config.knots; ++i) {
    curve[i] = mu(static_cast<double>(i) / static_cast<double>(config.knots));
  }
  return estimate_excess(curve, config);
}

double excess_vs_average_trend(const MeanFit& fit, double t0, const ExcessConfig& config) {
  if (!(t0 > 0.0 && t0 < 1.0)) fail(ErrorCode::kInvalidWindow, "t0 must lie in (0, 1)");
  config.validate();
  check_anchor_grid(fit.query_grid, config.knots);
  const auto& grid = fit.query_grid;
  const auto& mu = fit.mu_tilde;

  double integral = 0.0;
  for (std::size_t i = 1; i < grid.size() && grid[i - 1] < t0; ++i) {
    const double right = std::min(grid[i], t0);
    const double frac = (right - grid[i - 1]) / (grid[i] - grid[i - 1]);
    const double mu_right = mu[i - 1] + frac * (mu[i] - mu[i - 1]);
    integral += 0.5 * (mu[i - 1] + mu_right) * (right - grid[i - 1]);
  }
  const double average = integral / t0;

  const double big_n = static_cast<double>(config.knots);
  const auto first = static_cast<std::size_t>(std::floor(big_n * t0));
  std::vector<double> terms;
  terms.reserve(config.knots - first + 1);
  for (std::size_t i = first; i <= config.knots; ++i) {
    terms.push_back(config.kernel.cdf((mu[i] - average - config.level_c) / config.h_d));
  }
  return pairwise_sum(terms) / big_n;
}

double relative_excess(const MeanFit& fit, const ExcessConfig& config, double baseline_floor) {
  config.validate();
  check_anchor_grid(fit.query_grid, config.knots);
  const double origin = fit.mu_tilde[0];
  if (!(std::abs(origin) > baseline_floor)) {
    fail(ErrorCode::kZeroBaseline, "|mu(0)| = " + std::to_string(std::abs(origin)) +
                                       " is below the floor " + std::to_string(baseline_floor));
  }
  const double c = config.level_c;
  const double h = config.h_d;
  std::vector<double> terms(config.knots);
  for (std::size_t i = 1; i <= config.knots; ++i) {
    const double ratio = (fit.mu_tilde[i] - origin) / origin;
    terms[i - 1] = config.kernel.cdf((ratio - c) / h) + 1.0 - config.kernel.cdf((ratio + c) / h);
  }
  return pairwise_sum(terms) / static_cast<double>(config.knots);
}

double level_band_measure(const std::function<double(double)>& mu, double level, double delta,
                          std::size_t resolution) {
  std::size_t inside = 0;
  for (std::size_t k = 0; k < resolution; ++k) {
    const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(resolution);
    if (std::abs(mu(t) - level) <= delta) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(resolution);
}

}  // namespace relchange
