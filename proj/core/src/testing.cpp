#include "relchange/testing.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "relchange/error.hpp"
#include "relchange/parallel.hpp"

namespace relchange {

std::string to_string(Side side) {
  switch (side) {
    case Side::kPlus: return "plus";
    case Side::kMinus: return "minus";
    case Side::kTwoSided: return "two_sided";
  }
  return "plus";
}

Side side_from_string(const std::string& name) {
  if (name == "plus") return Side::kPlus;
  if (name == "minus") return Side::kMinus;
  if (name == "two_sided" || name == "two-sided") return Side::kTwoSided;
  fail(ErrorCode::kConfigError, "unknown side '" + name + "'");
}

void TestConfig::validate() const {
  if (!(level_c > 0.0)) fail(ErrorCode::kConfigError, "c must be positive");
  if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::kConfigError, "delta must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha <= 0.5)) fail(ErrorCode::kConfigError, "alpha must lie in (0, 0.5]");
  if (bandwidth_mode == BandwidthMode::kFixed && !(bandwidth > 0.0 && bandwidth <= 1.0)) {
    fail(ErrorCode::kConfigError, "fixed bandwidth must lie in (0, 1]");
  }
  if (knots && *knots == 0) fail(ErrorCode::kConfigError, "N must be positive");
  if (h_d && !(*h_d > 0.0)) fail(ErrorCode::kConfigError, "h_d must be positive");
}

ExcessConfig TestConfig::excess_config(std::size_t n, double b_n) const {
  ExcessConfig cfg;
  cfg.level_c = level_c;
  cfg.knots = knots.value_or(n);
  cfg.h_d = h_d.value_or(default_hd(cfg.knots));
  cfg.b_n = b_n;
  cfg.kernel = k_d;
  return cfg;
}

double TestOutcome::tested_excess() const {
  switch (config.side) {
    case Side::kPlus: return estimate.t_plus;
    case Side::kMinus: return estimate.t_minus;
    case Side::kTwoSided: return estimate.t_total;
  }
  return estimate.t_plus;
}

double v_bar(const MeanFit& fit, std::span<const double> sigma2_at_design,
             const ExcessConfig& config, Side side) {
  config.validate();
  const std::size_t big_n = config.knots;
  if (fit.mu_tilde.size() != big_n + 1) {
    fail(ErrorCode::kInvalidArgument, "fit must be evaluated on {0, 1/N, ..., 1}");
  }
  if (!(fit.bandwidth > 0.0)) fail(ErrorCode::kInvalidArgument, "fit has no bandwidth");
  const std::size_t n = sigma2_at_design.size();
  if (n == 0) fail(ErrorCode::kInvalidArgument, "empty long-run variance");

  const double c = config.level_c;
  const double h = config.h_d;
  const double b = fit.bandwidth;
  const Kernel& k_d = config.kernel;
  const JackknifeKernels jk(fit.kernel);
  const double origin = fit.mu_tilde[0];

  // Nonzero indicator weights, ordered by i.
  std::vector<std::size_t> active;
  std::vector<double> weights;
  for (std::size_t i = 1; i <= big_n; ++i) {
    const double v = fit.mu_tilde[i] - origin;
    double w = 0.0;
    if (side != Side::kMinus) w += k_d((v - c) / h);
    if (side != Side::kPlus) w -= k_d((v + c) / h);
    if (w != 0.0) {
      active.push_back(i);
      weights.push_back(w);
    }
  }
  if (active.empty()) return 0.0;
  const double weight_total = pairwise_sum(weights);

  const double nd = static_cast<double>(n);
  const double big_nd = static_cast<double>(big_n);
  std::vector<double> terms(n, 0.0);
  parallel_for(n, [&](std::size_t idx) {
    const double s2 = sigma2_at_design[idx];
    if (s2 == 0.0) return;
    const double t_j = static_cast<double>(idx + 1) / nd;
    const double boundary = jk.k_bar_star(t_j / b);
    // Active knots with |i/N - t_j| <= b.
    const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor((t_j - b) * big_nd)));
    const auto hi = static_cast<std::size_t>(std::ceil((t_j + b) * big_nd));
    auto first = std::lower_bound(active.begin(), active.end(), lo);
    auto last = std::upper_bound(first, active.end(), hi);
    if (first == last && boundary == 0.0) return;
    double inner = 0.0;
    for (auto it = first; it != last; ++it) {
      const auto k = static_cast<std::size_t>(it - active.begin());
      inner += weights[k] * jk.k_star((static_cast<double>(*it) / big_nd - t_j) / b);
    }
    inner -= boundary * weight_total;
    terms[idx] = s2 * inner * inner;
  });
  return pairwise_sum(terms);
}

double v_bar(const MeanFit& fit, const LrvCurve& lrv, std::size_t n, const ExcessConfig& config,
             Side side) {
  std::vector<double> s2(n);
  for (std::size_t j = 0; j < n; ++j) {
    s2[j] = lrv.at(static_cast<double>(j + 1) / static_cast<double>(n));
  }
  return v_bar(fit, s2, config, side);
}

void decide(TestOutcome& outcome, double alpha) {
  const boost::math::normal standard;
  if (outcome.v_bar > 0.0) {
    const double sd = std::sqrt(outcome.v_bar);
    outcome.degenerate_variance = false;
    outcome.quantile = boost::math::quantile(standard, 1.0 - alpha) * sd;
    outcome.p_value = boost::math::cdf(boost::math::complement(standard, outcome.statistic / sd));
    outcome.reject = outcome.statistic > outcome.quantile;
  } else {
    outcome.degenerate_variance = true;
    outcome.quantile = 0.0;
    outcome.reject = outcome.statistic > 0.0;
    outcome.p_value = outcome.reject ? 0.0 : 1.0;
  }
}

double resolve_bandwidth(const TimeSeries& series, const TestConfig& config) {
  if (config.bandwidth_mode == BandwidthMode::kFixed) return config.bandwidth;
  GcvOptions options;
  options.band = config.covariance_band;
  return gcv_bandwidth(series, default_gcv_candidates(series.size()), config.kernel, options);
}

LrvTuning resolve_lrv_tuning(const TimeSeries& series, const TestConfig& config) {
  switch (config.lrv_mode) {
    case LrvMode::kFixed: return config.lrv_tuning;
    case LrvMode::kAuto: {
      const auto blocks = default_block_grid(series.size());
      const auto taus = default_tau_grid(series.size(), blocks.back());
      return minimal_volatility_tuning(series, blocks, taus, config.kernel);
    }
    case LrvMode::kDefault: break;
  }
  return default_tuning(series.size());
}

TestOutcome run_test(const TimeSeries& series, const TestConfig& config) {
  config.validate();
  const std::size_t n = series.size();
  TestOutcome out;
  out.config = config;
  out.bandwidth = resolve_bandwidth(series, config);
  const ExcessConfig excess = config.excess_config(n, out.bandwidth);
  excess.validate();

  const MeanFit fit = jackknife_fit(series, anchor_grid(excess.knots), out.bandwidth, config.kernel);
  out.estimate = estimate_excess(fit, excess);
  out.uncorrected = estimate_excess(fit.mu_hat, excess);

  out.lrv_tuning = resolve_lrv_tuning(series, config);
  const DifferenceLrv lrv(series, out.lrv_tuning.block, out.lrv_tuning.tau, config.kernel);
  std::vector<double> s2(n);
  for (std::size_t j = 0; j < n; ++j) s2[j] = lrv(static_cast<double>(j + 1) / static_cast<double>(n));
  out.v_bar = v_bar(fit, s2, excess, config.side);

  const double scale = static_cast<double>(n) * static_cast<double>(excess.knots) *
                       out.bandwidth * excess.h_d;
  out.statistic = scale * (out.tested_excess() - config.delta);
  decide(out, config.alpha);
  return out;
}

}  // namespace relchange
