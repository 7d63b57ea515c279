#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "relchange/error.hpp"
#include "relchange/regression.hpp"

using namespace relchange;

namespace {

TimeSeries from(std::size_t n, const std::function<double(double)>& f) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(static_cast<double>(i + 1) / n);
  return TimeSeries(std::move(v));
}

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (auto& x : v) x = z(rng);
  return v;
}

const Kernel kEpa = Kernel::epanechnikov();

}  // namespace

TEST(Series, Validation) {
  EXPECT_THROW(TimeSeries(std::vector<double>(9, 1.0)), Error);
  std::vector<double> v(20, 1.0);
  v[4] = std::nan("");
  EXPECT_THROW(TimeSeries{v}, Error);
  const TimeSeries s(std::vector<double>(20, 2.0));
  EXPECT_EQ(s.size(), 20u);
  EXPECT_DOUBLE_EQ(s.time(0), 0.05);
  EXPECT_DOUBLE_EQ(s.time(19), 1.0);

  const MultiSeries m(10, 2, std::vector<double>(20, 1.0));
  EXPECT_EQ(m.component(1).size(), 10u);
  EXPECT_THROW(MultiSeries(10, 2, std::vector<double>(19, 1.0)), Error);
  EXPECT_THROW(MultiSeries(10, 0, {}), Error);
}

TEST(LocalLinear, ReproducesConstantsAndLines) {
  const TimeSeries flat = from(200, [](double) { return 5.0; });
  const auto est = local_linear(flat, 0.3, 0.2, kEpa);
  EXPECT_NEAR(est.mu, 5.0, 1e-12);
  EXPECT_NEAR(est.slope, 0.0, 1e-10);

  const TimeSeries line = from(200, [](double t) { return 3.0 + 2.0 * t; });
  for (double t : {0.0, 0.1, 0.5, 0.77, 1.0}) {
    const auto e = local_linear(line, t, 0.2, kEpa);
    EXPECT_NEAR(e.mu, 3.0 + 2.0 * t, 1e-10);
    EXPECT_NEAR(e.slope, 2.0, 1e-10);
  }
}

TEST(LocalLinear, MatchesWeightedLeastSquares) {
  const std::size_t n = 500;
  const TimeSeries s = from(n, [](double t) { return std::sin(2 * std::numbers::pi * t); });
  const auto e = local_linear(s, 0.5, 0.1, kEpa);
  EXPECT_NEAR(e.mu, oracle::local_linear_wls(s.values(), 0.5, 0.1), 1e-12);
  // Interior bias is mu''(t) mu2 b^2 to leading order; mu''(0.5) = 0 here.
  const double bound = 4 * std::numbers::pi * std::numbers::pi * 0.1 * 0.01 / 2;
  EXPECT_LE(std::abs(e.mu - 0.0), bound);

  const TimeSeries noisy(gaussian(300, 7));
  for (double t : {0.0, 0.02, 0.4, 0.99, 1.0}) {
    EXPECT_NEAR(local_linear(noisy, t, 0.15, kEpa).mu,
                oracle::local_linear_wls(noisy.values(), t, 0.15), 1e-10);
  }
}

TEST(LocalLinear, Preconditions) {
  const TimeSeries s(gaussian(100, 1));
  try {
    local_linear(s, 0.5, 0.01, kEpa);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateWindow);
  }
  EXPECT_THROW(local_linear(s, 1.2, 0.2, kEpa), Error);
}

TEST(Jackknife, CombinesTwoBandwidths) {
  const TimeSeries s(gaussian(400, 3));
  const auto grid = anchor_grid(40);
  const MeanFit fit = jackknife_fit(s, grid, 0.2, kEpa);
  ASSERT_EQ(fit.mu_tilde.size(), 41u);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double wide = local_linear(s, grid[j], 0.2, kEpa).mu;
    const double narrow = local_linear(s, grid[j], 0.2 / std::sqrt(2.0), kEpa).mu;
    EXPECT_DOUBLE_EQ(fit.mu_hat[j], wide);
    EXPECT_NEAR(fit.mu_tilde[j], 2 * narrow - wide, 1e-14);
  }
  const TimeSeries flat = from(100, [](double) { return -1.5; });
  for (double v : jackknife_fit(flat, grid, 0.3, kEpa).mu_tilde) EXPECT_NEAR(v, -1.5, 1e-12);
}

TEST(Jackknife, BiasRates) {
  const std::size_t n = 2000;
  auto mu = [](double t) { return std::sin(2 * std::numbers::pi * t); };
  const TimeSeries s = from(n, mu);
  std::vector<double> interior;
  for (int k = 0; k <= 40; ++k) interior.push_back(0.3 + 0.4 * k / 40.0);
  auto errors = [&](double b) {
    const MeanFit f = jackknife_fit(s, interior, b, kEpa);
    double et = 0, eh = 0;
    for (std::size_t j = 0; j < interior.size(); ++j) {
      et = std::max(et, std::abs(f.mu_tilde[j] - mu(interior[j])));
      eh = std::max(eh, std::abs(f.mu_hat[j] - mu(interior[j])));
    }
    return std::pair{et, eh};
  };
  const auto [t1, h1] = errors(0.2);
  const auto [t2, h2] = errors(0.1);
  EXPECT_GE(t1 / t2, 6.0);
  EXPECT_GE(h1 / h2, 3.0);
  EXPECT_LE(h1 / h2, 5.0);
}

TEST(Jackknife, QuadraticIsCancelled) {
  const TimeSeries s = from(2000, [](double t) { return t * t; });
  const std::vector<double> grid{0.3, 0.5, 0.7};
  const MeanFit f = jackknife_fit(s, grid, 0.2, kEpa);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double et = std::abs(f.mu_tilde[j] - grid[j] * grid[j]);
    const double eh = std::abs(f.mu_hat[j] - grid[j] * grid[j]);
    EXPECT_LE(et, 1e-3 * eh);
  }
  // Boundary value stays close on the same curve.
  const MeanFit at0 = jackknife_fit(s, std::vector<double>{0.0}, 0.1, kEpa);
  EXPECT_LT(std::abs(at0.mu_tilde[0]), 1e-3);
}

TEST(Grids, AnchorAndDesign) {
  const auto a = anchor_grid(4);
  EXPECT_EQ(a, (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  const auto d = design_grid(4);
  EXPECT_EQ(d, (std::vector<double>{0.25, 0.5, 0.75, 1.0}));
  EXPECT_THROW(anchor_grid(0), Error);
}

TEST(BandedCovariance, DiagonalWhenBandZero) {
  const auto e = gaussian(50, 5);
  const BandedCovariance cov = banded_covariance(e, 0);
  double mean = 0;
  for (double x : e) mean += x;
  mean /= 50;
  double var = 0;
  for (double x : e) var += (x - mean) * (x - mean);
  var /= 50;
  EXPECT_NEAR(cov.entry(3, 3), var, 1e-12);
  EXPECT_EQ(cov.entry(3, 4), 0.0);
  EXPECT_EQ(cov.ridge(), 0.0);
}

TEST(BandedCovariance, IidBandsNearZero) {
  const auto e = gaussian(1000, 11);
  const BandedCovariance cov = banded_covariance(e, 5);
  for (std::size_t lag = 1; lag <= 5; ++lag) {
    EXPECT_LE(std::abs(cov.entry(0, lag)), 3.0 / std::sqrt(1000.0));
  }
  EXPECT_EQ(cov.entry(0, 6), 0.0);
}

TEST(BandedCovariance, Ar1LagRatio) {
  const auto eta = gaussian(5000, 13);
  std::vector<double> e(eta.size());
  e[0] = eta[0];
  for (std::size_t i = 1; i < e.size(); ++i) e[i] = 0.5 * e[i - 1] + eta[i];
  const BandedCovariance cov = banded_covariance(e, 3);
  EXPECT_NEAR(cov.entry(1, 0) / cov.entry(0, 0), 0.5, 0.05);
}

TEST(BandedCovariance, PositiveDefiniteAndSolves) {
  // Alternating residuals make the raw banded Toeplitz matrix indefinite.
  std::vector<double> e(30);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = (i % 3 == 0) ? 2.0 : -1.0;
  const BandedCovariance cov = banded_covariance(e, 8);
  const auto n = static_cast<Eigen::Index>(cov.size());
  Eigen::MatrixXd full(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) full(i, j) = cov.entry(i, j);
  EXPECT_TRUE(full.isApprox(full.transpose()));
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(full).eigenvalues().minCoeff(), 0.0);

  std::vector<double> rhs(30);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = std::cos(i * 0.3);
  const auto x = cov.solve(rhs);
  const Eigen::VectorXd r = full * Eigen::Map<const Eigen::VectorXd>(x.data(), n) -
                            Eigen::Map<const Eigen::VectorXd>(rhs.data(), n);
  EXPECT_LT(r.norm(), 1e-8);
  EXPECT_THROW(banded_covariance(e, 30), Error);
}

TEST(Gcv, SingleCandidateAndDegenerate) {
  const TimeSeries s(gaussian(200, 17));
  const std::vector<double> single{0.15};
  EXPECT_DOUBLE_EQ(gcv_bandwidth(s, single, kEpa), 0.15);
  const std::vector<double> tiny{0.001, 0.002};
  try {
    gcv_bandwidth(s, tiny, kEpa);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllCandidatesDegenerate);
  }
}

TEST(Gcv, DefaultCandidates) {
  const auto c = default_gcv_candidates(500);
  ASSERT_EQ(c.size(), 15u);
  EXPECT_NEAR(c.front(), 0.05, 1e-15);
  EXPECT_NEAR(c.back(), 0.4, 1e-15);
  EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
  EXPECT_NEAR(default_gcv_candidates(40).front(), 0.1, 1e-15);
  EXPECT_EQ(default_covariance_band(1000), 10u);
}

TEST(Gcv, ShiftInvariant) {
  auto v = gaussian(300, 19);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += std::sin(3.0 * i / 300.0);
  const TimeSeries s(v);
  for (auto& x : v) x += 12.5;
  const TimeSeries shifted(v);
  const auto cands = default_gcv_candidates(300);
  EXPECT_DOUBLE_EQ(gcv_bandwidth(s, cands, kEpa), gcv_bandwidth(shifted, cands, kEpa));
}

TEST(Gcv, WhiteNoiseOversmooths) {
  const auto cands = default_gcv_candidates(300);
  const double grid_median = cands[cands.size() / 2];
  std::vector<double> picks;
  for (std::uint64_t r = 0; r < 100; ++r) {
    picks.push_back(gcv_bandwidth(TimeSeries(gaussian(300, 1000 + r)), cands, kEpa));
  }
  std::nth_element(picks.begin(), picks.begin() + 50, picks.end());
  EXPECT_GE(picks[50], grid_median);
}
