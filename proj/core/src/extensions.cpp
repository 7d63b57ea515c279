#include "relchange/extensions.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "relchange/error.hpp"
#include "relchange/parallel.hpp"

namespace relchange {

namespace {

void check_fits(std::span<const MeanFit> fits, std::size_t knots) {
  if (fits.empty()) fail(ErrorCode::kInvalidArgument, "no coordinate fits");
  for (const auto& fit : fits) {
    if (fit.mu_tilde.size() != knots + 1 || fit.query_grid != fits.front().query_grid) {
      fail(ErrorCode::kInvalidArgument, "coordinate fits must share anchor_grid(N)");
    }
  }
}

double squared_distance(std::span<const MeanFit> fits, std::size_t i) {
  double g = 0.0;
  for (const auto& fit : fits) {
    const double d = fit.mu_tilde[i] - fit.mu_tilde[0];
    g += d * d;
  }
  return g;
}

}  // namespace

double multivariate_excess(std::span<const MeanFit> fits, const ExcessConfig& config) {
  config.validate();
  check_fits(fits, config.knots);
  const double c2 = config.level_c * config.level_c;
  std::vector<double> terms(config.knots);
  for (std::size_t i = 1; i <= config.knots; ++i) {
    terms[i - 1] = config.kernel.cdf((squared_distance(fits, i) - c2) / config.h_d);
  }
  return pairwise_sum(terms) / static_cast<double>(config.knots);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& matrix) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix);
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

LrvMatrixCurve lrv_matrix_estimate(const MultiSeries& series, const LrvTuning& tuning,
                                   const Kernel& kernel, std::span<const double> grid) {
  const std::size_t n = series.size();
  const std::size_t dims = series.dims();
  const std::size_t m = tuning.block;
  const double nd = static_cast<double>(n);
  if (m < 2 || 4 * m > n) fail(ErrorCode::kInvalidTuning, "block length must satisfy 2 <= m <= n/4");
  if (!(tuning.tau > static_cast<double>(m) / nd && tuning.tau < 0.5)) {
    fail(ErrorCode::kInvalidTuning, "tau must lie in (m/n, 0.5)");
  }

  Eigen::MatrixXd prefix = Eigen::MatrixXd::Zero(n + 1, dims);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dims; ++d) {
      prefix(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(d)) =
          prefix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) + series.at(i, d);
    }
  }
  auto row = [&](std::size_t k) { return prefix.row(static_cast<Eigen::Index>(k)); };
  // Outer products m D_j D_j^T / 2 for j = m..n-m.
  std::vector<Eigen::MatrixXd> terms;
  terms.reserve(n - 2 * m + 1);
  for (std::size_t j = m; j <= n - m; ++j) {
    const Eigen::RowVectorXd diff =
        ((row(j) - row(j - m)) - (row(j + m) - row(j))) / static_cast<double>(m);
    terms.push_back(static_cast<double>(m) * diff.transpose() * diff / 2.0);
  }

  LrvMatrixCurve curve;
  curve.grid.assign(grid.begin(), grid.end());
  curve.tuning = tuning;
  const double edge = static_cast<double>(m) / nd;
  for (double t : grid) {
    t = std::clamp(t, edge, 1.0 - edge);
    const auto lo = std::max<long>(static_cast<long>(m),
                                   static_cast<long>(std::floor((t - tuning.tau) * nd)));
    const auto hi = std::min<long>(static_cast<long>(n - m),
                                   static_cast<long>(std::ceil((t + tuning.tau) * nd)));
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dims),
                                                static_cast<Eigen::Index>(dims));
    double weight = 0.0;
    for (long j = lo; j <= hi; ++j) {
      const double w = kernel((static_cast<double>(j) / nd - t) / tuning.tau);
      if (w == 0.0) continue;
      acc += w * terms[static_cast<std::size_t>(j) - m];
      weight += w;
    }
    acc /= weight;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(acc);
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
    curve.matrices.push_back(eig.eigenvectors() * clipped.asDiagonal() *
                             eig.eigenvectors().transpose());
  }
  return curve;
}

TestOutcome multivariate_test(const MultiSeries& series, const TestConfig& config,
                              std::size_t mc_draws, std::uint64_t seed) {
  config.validate();
  if (mc_draws < 1000) fail(ErrorCode::kInvalidArgument, "mc_draws must be at least 1000");
  const std::size_t n = series.size();
  const std::size_t dims = series.dims();

  std::vector<TimeSeries> components;
  components.reserve(dims);
  for (std::size_t d = 0; d < dims; ++d) components.push_back(series.component(d));

  TestOutcome out;
  out.config = config;
  out.bandwidth = 0.0;
  for (const auto& comp : components) {
    out.bandwidth = std::max(out.bandwidth, resolve_bandwidth(comp, config));
  }
  const ExcessConfig excess = config.excess_config(n, out.bandwidth);
  excess.validate();
  const std::size_t big_n = excess.knots;
  const auto grid = anchor_grid(big_n);

  std::vector<MeanFit> fits;
  fits.reserve(dims);
  for (const auto& comp : components) {
    fits.push_back(jackknife_fit(comp, grid, out.bandwidth, config.kernel));
  }
  const double estimate = multivariate_excess(fits, excess);
  out.estimate.config = excess;
  out.estimate.t_plus = estimate;
  out.estimate.t_total = estimate;

  out.lrv_tuning = config.lrv_mode == LrvMode::kDefault ? default_tuning(n) : config.lrv_tuning;
  if (config.lrv_mode == LrvMode::kAuto) {
    out.lrv_tuning = {0, 0.0};
    for (const auto& comp : components) {
      const LrvTuning t = resolve_lrv_tuning(comp, config);
      out.lrv_tuning.block = std::max(out.lrv_tuning.block, t.block);
      out.lrv_tuning.tau = std::max(out.lrv_tuning.tau, t.tau);
    }
  }
  const auto design = design_grid(n);
  const LrvMatrixCurve lrv = lrv_matrix_estimate(series, out.lrv_tuning, config.kernel, design);

  // Multiplier loadings a_j = Sigma^{1/2}(j/n) u_j.
  const JackknifeKernels jk(config.kernel);
  const double c2 = excess.level_c * excess.level_c;
  const double b = out.bandwidth;
  const double nd = static_cast<double>(n);
  const double big_nd = static_cast<double>(big_n);
  const auto dim = static_cast<Eigen::Index>(dims);

  std::vector<std::size_t> active;
  std::vector<Eigen::VectorXd> weighted_gradients;
  for (std::size_t i = 1; i <= big_n; ++i) {
    const double w = excess.kernel((squared_distance(fits, i) - c2) / excess.h_d);
    if (w == 0.0) continue;
    Eigen::VectorXd grad(dim);
    for (std::size_t d = 0; d < dims; ++d) {
      grad(static_cast<Eigen::Index>(d)) = 2.0 * (fits[d].mu_tilde[i] - fits[d].mu_tilde[0]);
    }
    active.push_back(i);
    weighted_gradients.push_back(w * grad);
  }
  Eigen::VectorXd gradient_total = Eigen::VectorXd::Zero(dim);
  for (const auto& g : weighted_gradients) gradient_total += g;

  std::vector<Eigen::VectorXd> loadings(n, Eigen::VectorXd::Zero(dim));
  std::vector<double> energy(n, 0.0);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const double t_j = design[idx];
    Eigen::VectorXd u = -jk.k_bar_star(t_j / b) * gradient_total;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double x = (static_cast<double>(active[k]) / big_nd - t_j) / b;
      if (std::abs(x) <= 1.0) u += jk.k_star(x) * weighted_gradients[k];
    }
    loadings[idx] = psd_sqrt(lrv.matrices[idx]) * u;
    energy[idx] = loadings[idx].squaredNorm();
  }
  out.v_bar = pairwise_sum(energy);

  const double scale = nd * big_nd * b * excess.h_d;
  out.statistic = scale * (estimate - config.delta);

  if (out.v_bar > 0.0) {
    std::vector<double> draws(mc_draws);
    parallel_for(mc_draws, [&](std::size_t r) {
      std::mt19937_64 rng(derive_seed(seed, r));
      std::normal_distribution<double> normal;
      std::vector<double> parts(n);
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (Eigen::Index d = 0; d < dim; ++d) s += loadings[j](d) * normal(rng);
        parts[j] = s;
      }
      draws[r] = pairwise_sum(parts);
    });
    std::sort(draws.begin(), draws.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil((1.0 - config.alpha) * static_cast<double>(mc_draws)));
    out.quantile = draws[std::clamp<std::size_t>(rank, 1, mc_draws) - 1];
    const auto above = static_cast<std::size_t>(
        draws.end() - std::lower_bound(draws.begin(), draws.end(), out.statistic));
    out.p_value = static_cast<double>(above) / static_cast<double>(mc_draws);
    out.reject = out.statistic > out.quantile;
    out.degenerate_variance = false;
  } else {
    out.degenerate_variance = true;
    out.quantile = 0.0;
    out.reject = out.statistic > 0.0;
    out.p_value = out.reject ? 0.0 : 1.0;
  }
  return out;
}

SojournEstimate sojourn_estimators(const MeanFit& fit, std::span<const double> residual_diffs,
                                   const ExcessConfig& config, double delta) {
  config.validate();
  if (fit.mu_tilde.size() != config.knots + 1) {
    fail(ErrorCode::kInvalidArgument, "fit must be evaluated on {0, 1/N, ..., 1}");
  }
  if (residual_diffs.empty()) fail(ErrorCode::kInvalidArgument, "no residual differences");
  const std::size_t big_n = config.knots;
  const double c = config.level_c;
  const double h = config.h_d;
  const double origin = fit.mu_tilde[0];

  std::vector<double> inner(residual_diffs.size());
  parallel_for(residual_diffs.size(), [&](std::size_t i) {
    std::vector<double> terms(big_n);
    for (std::size_t s = 1; s <= big_n; ++s) {
      const double v = fit.mu_tilde[s] - origin + residual_diffs[i];
      terms[s - 1] = config.kernel.cdf((v - c) / h) + 1.0 - config.kernel.cdf((v + c) / h);
    }
    inner[i] = pairwise_sum(terms) / static_cast<double>(big_n);
  });
  std::vector<double> exceed(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) exceed[i] = inner[i] > delta ? 1.0 : 0.0;
  const double count = static_cast<double>(inner.size());
  return {pairwise_sum(inner) / count, pairwise_sum(exceed) / count};
}

std::vector<double> residual_differences(const TimeSeries& series, double bandwidth,
                                         const Kernel& kernel) {
  const auto grid = design_grid(series.size());
  const MeanFit fit = jackknife_fit(series, grid, bandwidth, kernel);
  std::vector<double> diffs(series.size());
  const double first = series[0] - fit.mu_tilde[0];
  for (std::size_t i = 0; i < series.size(); ++i) diffs[i] = series[i] - fit.mu_tilde[i] - first;
  return diffs;
}

}  // namespace relchange
