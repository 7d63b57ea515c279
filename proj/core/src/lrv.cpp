#include "relchange/lrv.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "relchange/error.hpp"

namespace relchange {

double LrvCurve::at(double t) const {
  if (grid.empty()) fail(ErrorCode::kInvalidArgument, "empty LRV curve");
  if (t <= grid.front()) return sigma2.front();
  if (t >= grid.back()) return sigma2.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const auto hi = static_cast<std::size_t>(it - grid.begin());
  const std::size_t lo = hi - 1;
  const double frac = (t - grid[lo]) / (grid[hi] - grid[lo]);
  return sigma2[lo] + frac * (sigma2[hi] - sigma2[lo]);
}

DifferenceLrv::DifferenceLrv(const TimeSeries& series, std::size_t block, double tau,
                             Kernel kernel)
    : n_(series.size()), block_(block), tau_(tau), kernel_(std::move(kernel)) {
  const double nd = static_cast<double>(n_);
  if (block_ < 2 || 4 * block_ > n_) {
    fail(ErrorCode::kInvalidTuning, "block length m = " + std::to_string(block_) +
                                        " must satisfy 2 <= m <= n/4");
  }
  if (!(tau_ > static_cast<double>(block_) / nd && tau_ < 0.5)) {
    fail(ErrorCode::kInvalidTuning,
         "tau = " + std::to_string(tau_) + " must lie in (m/n, 0.5)");
  }
  // Block sums are formed directly rather than from running prefix sums so a
  // constant series yields differences that are exactly zero.
  const auto values = series.values();
  auto block_sum = [&](std::size_t from) {
    double sum = 0.0;
    for (std::size_t k = from; k < from + block_; ++k) sum += values[k];
    return sum;
  };
  const double m = static_cast<double>(block_);
  terms_.reserve(n_ - 2 * block_ + 1);
  for (std::size_t j = block_; j <= n_ - block_; ++j) {
    const double left = block_sum(j - block_);
    const double right = block_sum(j);
    const double diff = (left - right) / m;
    terms_.push_back(m * diff * diff / 2.0);
  }
  if (kernel_.is_epanechnikov()) {
    for (int p = 0; p < 3; ++p) {
      moment_prefix_[p].assign(terms_.size() + 1, 0.0);
      term_prefix_[p].assign(terms_.size() + 1, 0.0);
    }
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      const double x = static_cast<double>(k) / nd;
      const double pw[3] = {1.0, x, x * x};
      for (int p = 0; p < 3; ++p) {
        moment_prefix_[p][k + 1] = moment_prefix_[p][k] + pw[p];
        term_prefix_[p][k + 1] = term_prefix_[p][k] + pw[p] * terms_[k];
      }
    }
  }
}

double DifferenceLrv::epanechnikov_at(double t) const {
  // Window |j/n - t| <= tau in the shifted coordinate x = (j - m)/n; the
  // weight 1 - ((x - s)/tau)^2 expands into three prefix-sum moments.
  const double nd = static_cast<double>(n_);
  const double s = t - static_cast<double>(block_) / nd;
  const auto last = static_cast<long>(terms_.size()) - 1;
  const long k_lo = std::max(0L, static_cast<long>(std::ceil((s - tau_) * nd)));
  const long k_hi = std::min(last, static_cast<long>(std::floor((s + tau_) * nd)));
  auto range = [&](const std::vector<double>& prefix) {
    return prefix[static_cast<std::size_t>(k_hi + 1)] - prefix[static_cast<std::size_t>(k_lo)];
  };
  const double t2 = tau_ * tau_;
  const double a = 1.0 - s * s / t2, b = 2.0 * s / t2, c = -1.0 / t2;
  const double num = a * range(term_prefix_[0]) + b * range(term_prefix_[1]) +
                     c * range(term_prefix_[2]);
  const double den = a * range(moment_prefix_[0]) + b * range(moment_prefix_[1]) +
                     c * range(moment_prefix_[2]);
  return num / den;
}

double DifferenceLrv::operator()(double t) const {
  const double nd = static_cast<double>(n_);
  const double edge = static_cast<double>(block_) / nd;
  t = std::clamp(t, edge, 1.0 - edge);
  if (kernel_.is_epanechnikov()) return epanechnikov_at(t);
  // terms_[k] belongs to j = block_ + k.
  const auto j_lo = std::max<long>(static_cast<long>(block_),
                                   static_cast<long>(std::floor((t - tau_) * nd)));
  const auto j_hi = std::min<long>(static_cast<long>(n_ - block_),
                                   static_cast<long>(std::ceil((t + tau_) * nd)));
  double num = 0.0, den = 0.0;
  for (long j = j_lo; j <= j_hi; ++j) {
    const double w = kernel_((static_cast<double>(j) / nd - t) / tau_);
    num += w * terms_[static_cast<std::size_t>(j) - block_];
    den += w;
  }
  return num / den;
}

LrvCurve DifferenceLrv::evaluate(std::span<const double> grid) const {
  LrvCurve curve;
  curve.grid.assign(grid.begin(), grid.end());
  curve.sigma2.reserve(grid.size());
  for (double t : grid) curve.sigma2.push_back((*this)(t));
  curve.block = block_;
  curve.tau = tau_;
  return curve;
}

LrvCurve lrv_estimate(const TimeSeries& series, std::size_t block, double tau,
                      const Kernel& kernel, std::span<const double> grid) {
  return DifferenceLrv(series, block, tau, kernel).evaluate(grid);
}

LrvTuning default_tuning(std::size_t n) {
  const double nd = static_cast<double>(n);
  LrvTuning tuning;
  tuning.block =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(std::pow(nd, 2.0 / 7.0))));
  tuning.tau = std::min(std::pow(nd, -1.0 / 7.0), 0.49);
  return tuning;
}

std::vector<std::size_t> default_block_grid(std::size_t n) {
  const auto top = std::min<std::size_t>(
      static_cast<std::size_t>(std::ceil(3.0 * std::pow(static_cast<double>(n), 2.0 / 7.0))),
      n / 4);
  std::vector<std::size_t> grid;
  for (std::size_t m = 2; m <= top; ++m) grid.push_back(m);
  return grid;
}

std::vector<double> default_tau_grid(std::size_t n, std::size_t max_block) {
  constexpr int kCount = 10;
  const double lo = 1.5 * static_cast<double>(max_block) / static_cast<double>(n);
  const double hi = 0.49;
  std::vector<double> grid(kCount);
  for (int i = 0; i < kCount; ++i) {
    grid[static_cast<std::size_t>(i)] =
        std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (kCount - 1));
  }
  return grid;
}

MinimalVolatilityResult minimal_volatility_select(const TimeSeries& series,
                                                  std::span<const std::size_t> block_grid,
                                                  std::span<const double> tau_grid,
                                                  const Kernel& kernel) {
  if (block_grid.size() < 5 || tau_grid.size() < 5) {
    fail(ErrorCode::kGridTooSmall, "minimal volatility needs at least 5 values per grid");
  }
  std::vector<std::size_t> blocks(block_grid.begin(), block_grid.end());
  std::vector<double> taus(tau_grid.begin(), tau_grid.end());
  std::sort(blocks.begin(), blocks.end());
  std::sort(taus.begin(), taus.end());

  const double nd = static_cast<double>(series.size());
  const auto rows = static_cast<long>(blocks.size());
  const auto cols = static_cast<long>(taus.size());

  std::vector<std::vector<DifferenceLrv>> estimators(blocks.size());
  for (std::size_t h = 0; h < blocks.size(); ++h) {
    for (double tau : taus) estimators[h].emplace_back(series, blocks[h], tau, kernel);
  }

  constexpr int kPoints = 101;
  MinimalVolatilityResult result;
  result.ise.resize(blocks.size() * taus.size());
  for (long h = 0; h < rows; ++h) {
    for (long j = 0; j < cols; ++j) {
      std::set<std::pair<long, long>> cells;
      for (long r = -2; r <= 2; ++r) {
        if (j + r >= 0 && j + r < cols) cells.insert({h, j + r});
        if (h + r >= 0 && h + r < rows) cells.insert({h + r, j});
      }
      const double gamma =
          std::min(0.5, taus[static_cast<std::size_t>(j)] +
                            static_cast<double>(blocks[static_cast<std::size_t>(h)]) / nd);
      double total = 0.0;
      for (int p = 0; p < kPoints; ++p) {
        const double t = gamma + (1.0 - 2.0 * gamma) * p / (kPoints - 1);
        double sum = 0.0, sum_sq = 0.0;
        for (const auto& [ch, cj] : cells) {
          const double v =
              estimators[static_cast<std::size_t>(ch)][static_cast<std::size_t>(cj)](t);
          sum += v;
          sum_sq += v * v;
        }
        const double k = static_cast<double>(cells.size());
        const double mean = sum / k;
        total += std::max(0.0, sum_sq / k - mean * mean);
      }
      result.ise[static_cast<std::size_t>(h * cols + j)] = total / kPoints;
    }
  }

  double is = 0.0;
  for (double v : result.ise) is += v;
  is /= static_cast<double>(result.ise.size());

  result.criterion.resize(result.ise.size());
  std::size_t best = 0;
  for (std::size_t h = 0; h < blocks.size(); ++h) {
    for (std::size_t j = 0; j < taus.size(); ++j) {
      const std::size_t idx = h * taus.size() + j;
      result.criterion[idx] =
          result.ise[idx] + 2.0 * (taus[j] + static_cast<double>(blocks[h]) / nd) * is;
      if (result.criterion[idx] < result.criterion[best]) best = idx;
    }
  }
  result.tuning = {blocks[best / taus.size()], taus[best % taus.size()]};
  return result;
}

}  // namespace relchange
