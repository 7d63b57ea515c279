#include "relchange/regression.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "relchange/error.hpp"

namespace relchange {

LocalLinearEstimate local_linear(const TimeSeries& series, double t, double bandwidth,
                                 const Kernel& kernel) {
  const auto n = series.size();
  const double nd = static_cast<double>(n);
  if (!(bandwidth >= 2.0 / nd)) {
    fail(ErrorCode::kDegenerateWindow,
         "bandwidth " + std::to_string(bandwidth) + " is below the floor 2/n");
  }
  if (!(t >= 0.0 && t <= 1.0)) fail(ErrorCode::kInvalidArgument, "t must lie in [0, 1]");

  // 1-based design indices i with |i/n - t| <= b, widened by one for rounding.
  const auto lo = static_cast<long>(std::max(1.0, std::floor((t - bandwidth) * nd)));
  const auto hi = static_cast<long>(std::min(nd, std::ceil((t + bandwidth) * nd)));

  double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
  for (long i = lo; i <= hi; ++i) {
    const double d = static_cast<double>(i) / nd - t;
    const double w = kernel(d / bandwidth);
    if (w == 0.0) continue;
    const double x = series[static_cast<std::size_t>(i - 1)];
    s0 += w;
    s1 += w * d;
    s2 += w * d * d;
    t0 += w * x;
    t1 += w * d * x;
  }
  const double det = s0 * s2 - s1 * s1;
  if (!(s0 > 0.0) || !(det > 1e-12 * s0 * s2)) {
    fail(ErrorCode::kDegenerateWindow, "singular local design at t = " + std::to_string(t) +
                                           ", b = " + std::to_string(bandwidth));
  }
  return {(s2 * t0 - s1 * t1) / det, (s0 * t1 - s1 * t0) / det};
}

MeanFit jackknife_fit(const TimeSeries& series, std::span<const double> query_grid,
                      double bandwidth, const Kernel& kernel) {
  MeanFit fit;
  fit.query_grid.assign(query_grid.begin(), query_grid.end());
  fit.bandwidth = bandwidth;
  fit.kernel = kernel;
  fit.mu_tilde.resize(query_grid.size());
  fit.mu_hat.resize(query_grid.size());
  const double half = bandwidth / JackknifeKernels::kSqrt2;
  for (std::size_t j = 0; j < query_grid.size(); ++j) {
    const double wide = local_linear(series, query_grid[j], bandwidth, kernel).mu;
    const double narrow = local_linear(series, query_grid[j], half, kernel).mu;
    fit.mu_hat[j] = wide;
    fit.mu_tilde[j] = 2.0 * narrow - wide;
  }
  return fit;
}

MeanFit plug_in_fit(const std::function<double(double)>& mu, std::span<const double> query_grid,
                    double bandwidth) {
  MeanFit fit;
  fit.query_grid.assign(query_grid.begin(), query_grid.end());
  fit.bandwidth = bandwidth;
  fit.mu_tilde.reserve(query_grid.size());
  for (double t : query_grid) fit.mu_tilde.push_back(mu(t));
  fit.mu_hat = fit.mu_tilde;
  return fit;
}

std::vector<double> anchor_grid(std::size_t knots) {
  if (knots == 0) fail(ErrorCode::kInvalidArgument, "grid needs at least one knot");
  std::vector<double> grid(knots + 1);
  for (std::size_t i = 0; i <= knots; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(knots);
  }
  return grid;
}

std::vector<double> design_grid(std::size_t n) {
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = static_cast<double>(i + 1) / static_cast<double>(n);
  }
  return grid;
}

double BandedCovariance::entry(std::size_t i, std::size_t j) const noexcept {
  const std::size_t lag = i > j ? i - j : j - i;
  double value = lag < autocov_.size() ? autocov_[lag] : 0.0;
  if (lag == 0) value += ridge_;
  return value;
}

std::vector<double> BandedCovariance::solve(std::span<const double> rhs) const {
  if (rhs.size() != n_) fail(ErrorCode::kInvalidArgument, "right-hand side has wrong length");
  std::vector<double> x(rhs.begin(), rhs.end());
  const auto kd = static_cast<lapack_int>(band_width());
  const lapack_int info =
      LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n_), kd, 1, factor_.data(),
                     kd + 1, x.data(), static_cast<lapack_int>(n_));
  if (info != 0) fail(ErrorCode::kInvalidArgument, "band solve failed");
  return x;
}

BandedCovariance banded_covariance(std::span<const double> residuals, std::size_t band) {
  const std::size_t n = residuals.size();
  if (n == 0) fail(ErrorCode::kInvalidArgument, "no residuals");
  if (band >= n) fail(ErrorCode::kInvalidArgument, "band width must be < n");

  double mean = 0.0;
  for (double e : residuals) mean += e;
  mean /= static_cast<double>(n);

  BandedCovariance cov;
  cov.n_ = n;
  cov.autocov_.assign(band + 1, 0.0);
  for (std::size_t lag = 0; lag <= band; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) {
      acc += (residuals[i] - mean) * (residuals[i + lag] - mean);
    }
    cov.autocov_[lag] = acc / static_cast<double>(n);
  }

  const std::size_t ld = band + 1;
  for (double ridge = 0.0;; ridge = ridge == 0.0 ? 1e-8 : ridge * 100.0) {
    cov.ridge_ = ridge;
    cov.factor_.assign(ld * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t lag = 0; lag <= band && j + lag < n; ++lag) {
        cov.factor_[lag + j * ld] = cov.autocov_[lag] + (lag == 0 ? ridge : 0.0);
      }
    }
    const lapack_int info =
        LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n),
                       static_cast<lapack_int>(band), cov.factor_.data(),
                       static_cast<lapack_int>(ld));
    if (info == 0) return cov;
    if (info < 0) fail(ErrorCode::kInvalidArgument, "band Cholesky rejected its arguments");
  }
}

std::size_t default_covariance_band(std::size_t n) {
  auto band = static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n)) + 1e-9));
  return std::min(band, n - 1);
}

std::vector<double> default_gcv_candidates(std::size_t n) {
  constexpr int kCount = 15;
  const double lo = std::max(0.05, 4.0 / static_cast<double>(n));
  const double hi = 0.4;
  std::vector<double> grid(kCount);
  for (int i = 0; i < kCount; ++i) {
    grid[static_cast<std::size_t>(i)] =
        std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (kCount - 1));
  }
  return grid;
}

namespace {

double whitened_score(const std::vector<double>& residuals, const BandedCovariance& cov,
                      double penalty) {
  const auto solved = cov.solve(residuals);
  double quad = 0.0;
  for (std::size_t i = 0; i < residuals.size(); ++i) quad += residuals[i] * solved[i];
  return quad / static_cast<double>(residuals.size()) / (penalty * penalty);
}

std::size_t argmin_smallest_bandwidth(const std::vector<GcvScore>& scores) {
  std::size_t best = scores.size();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i].score)) continue;
    if (best == scores.size() || scores[i].score < scores[best].score ||
        (scores[i].score == scores[best].score &&
         scores[i].bandwidth < scores[best].bandwidth)) {
      best = i;
    }
  }
  return best;
}

}  // namespace

GcvResult gcv_select(const TimeSeries& series, std::span<const double> candidates,
                     const Kernel& kernel, const GcvOptions& options) {
  if (candidates.empty()) fail(ErrorCode::kInvalidArgument, "no GCV candidates");
  const std::size_t n = series.size();
  const std::size_t band = options.band.value_or(default_covariance_band(n));
  const double k_star_zero = derive_jackknife(kernel).k_star_at_zero();
  const auto grid = design_grid(n);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<std::optional<std::vector<double>>> residuals(candidates.size());
  std::vector<double> penalties(candidates.size(), 0.0);
  std::vector<GcvScore> scores;
  scores.reserve(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double b = candidates[c];
    scores.push_back({b, kInf});
    const double penalty = 1.0 - k_star_zero / (static_cast<double>(n) * b);
    if (!(penalty > 0.0)) continue;
    try {
      const auto fit = jackknife_fit(series, grid, b, kernel);
      std::vector<double> e(n);
      for (std::size_t i = 0; i < n; ++i) e[i] = series[i] - fit.mu_tilde[i];
      scores.back().score = whitened_score(e, banded_covariance(e, band), penalty);
      residuals[c] = std::move(e);
      penalties[c] = penalty;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kDegenerateWindow) throw;
    }
  }

  const std::size_t pilot = argmin_smallest_bandwidth(scores);
  if (pilot == scores.size()) {
    fail(ErrorCode::kAllCandidatesDegenerate, "every GCV candidate bandwidth is degenerate");
  }

  const auto pilot_cov = banded_covariance(*residuals[pilot], band);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (residuals[c]) scores[c].score = whitened_score(*residuals[c], pilot_cov, penalties[c]);
  }
  const std::size_t best = argmin_smallest_bandwidth(scores);
  return {scores[best].bandwidth, scores[pilot].bandwidth, std::move(scores)};
}

}  // namespace relchange
