#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "relchange/error.hpp"
#include "relchange/excess.hpp"

using namespace relchange;

namespace {

double model_a(double t) { return 8.0 * (0.25 - (t - 0.5) * (t - 0.5)); }

ExcessConfig config(double c, std::size_t knots, double h) {
  ExcessConfig cfg;
  cfg.level_c = c;
  cfg.knots = knots;
  cfg.h_d = h;
  return cfg;
}

// {t : mu(t) - mu(0) > c} for model (a) has length sqrt(1 - c/2).
double exact_a(double c) { return std::sqrt(1.0 - c / 2.0); }

}  // namespace

TEST(SmoothIndicator, ClosedForm) {
  const Kernel k = Kernel::epanechnikov();
  EXPECT_DOUBLE_EQ(smooth_indicator_plus(1.0, 1.0, 0.1, k), 0.5);
  EXPECT_DOUBLE_EQ(smooth_indicator_plus(1.2, 1.0, 0.1, k), 1.0);
  EXPECT_NEAR(smooth_indicator_plus(0.95, 1.0, 0.1, k), 0.15625, 1e-15);
  EXPECT_DOUBLE_EQ(smooth_indicator_plus(0.85, 1.0, 0.1, k), 0.0);
}

TEST(ExcessConfig, DefaultsAndValidation) {
  const ExcessConfig cfg = ExcessConfig::with_defaults(1.0, 400, 0.2);
  EXPECT_EQ(cfg.knots, 400u);
  EXPECT_DOUBLE_EQ(cfg.h_d, 0.025);
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_THROW(config(0.0, 10, 0.1).validate(), Error);
  EXPECT_THROW(config(1.0, 0, 0.1).validate(), Error);
  ExcessConfig wide = config(1.0, 10, 0.3);
  wide.b_n = 0.2;
  EXPECT_THROW(wide.validate(), Error);
}

TEST(Excess, FlatFitIsZero) {
  const MeanFit fit = plug_in_fit([](double) { return 2.0; }, anchor_grid(100));
  const ExcessEstimate est = estimate_excess(fit, config(0.5, 100, 0.05));
  EXPECT_EQ(est.t_plus, 0.0);
  EXPECT_EQ(est.t_minus, 0.0);
  EXPECT_EQ(est.t_total, 0.0);
}

TEST(Excess, AnalyticAnchorsModelA) {
  const MeanFit fit = plug_in_fit(model_a, anchor_grid(100000));
  for (const auto [c, expected] : {std::pair{1.8, 0.3163}, {1.82, 0.3}, {1.955, 0.15}}) {
    const ExcessEstimate est = estimate_excess(fit, config(c, 100000, 1e-4));
    EXPECT_NEAR(est.t_plus, expected, 5e-4) << c;
    EXPECT_NEAR(est.t_plus, exact_a(c), 1e-4) << c;
    EXPECT_EQ(est.t_minus, 0.0);
  }
}

TEST(Excess, DeterministicMatchesPlugIn) {
  const ExcessConfig cfg = config(1.5, 1000, 0.01);
  const ExcessEstimate a = deterministic_excess_estimate(model_a, cfg);
  const ExcessEstimate b = estimate_excess(plug_in_fit(model_a, anchor_grid(1000)), cfg);
  EXPECT_DOUBLE_EQ(a.t_plus, b.t_plus);
  EXPECT_DOUBLE_EQ(deterministic_excess(model_a, cfg), a.t_plus);
  EXPECT_EQ(deterministic_excess(model_a, config(2.5, 1000, 0.01)), 0.0);
}

TEST(Excess, RiemannSumByHand) {
  // Brute-force sum with the oracle CDF on a rough curve.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<double> curve(51);
  for (auto& v : curve) v = z(rng);
  const ExcessConfig cfg = config(0.7, 50, 0.3);
  double plus = 0, minus = 0;
  for (std::size_t i = 1; i <= 50; ++i) {
    plus += oracle::epan_cdf((curve[i] - curve[0] - 0.7) / 0.3);
    minus += 1 - oracle::epan_cdf((curve[i] - curve[0] + 0.7) / 0.3);
  }
  const ExcessEstimate est = estimate_excess(curve, cfg);
  EXPECT_NEAR(est.t_plus, plus / 50, 1e-14);
  EXPECT_NEAR(est.t_minus, minus / 50, 1e-14);
  EXPECT_DOUBLE_EQ(est.t_total, est.t_plus + est.t_minus);
  EXPECT_THROW(estimate_excess(std::span(curve).first(50), cfg), Error);
}

TEST(Excess, MonotoneInLevelAndSignSymmetric) {
  std::vector<double> curve(201), negated(201);
  for (std::size_t i = 0; i <= 200; ++i) {
    curve[i] = std::sin(i / 20.0) * 2 + 0.1 * std::cos(i * 1.7);
    negated[i] = -curve[i];
  }
  double prev = 2.0;
  for (int k = 1; k <= 30; ++k) {
    const double c = 0.1 * k;
    const ExcessEstimate est = estimate_excess(curve, config(c, 200, 0.05));
    EXPECT_LE(est.t_plus, prev);
    prev = est.t_plus;
    const ExcessEstimate flipped = estimate_excess(negated, config(c, 200, 0.05));
    EXPECT_DOUBLE_EQ(flipped.t_plus, est.t_minus);
    EXPECT_GE(est.t_plus, 0.0);
    EXPECT_LE(est.t_total, 1.0);
  }
}

TEST(Excess, DiscretisationBound) {
  // |T_N - T| <= 2 * (band measure) + 2/N on model (a), c = 1.8.
  for (std::size_t big_n : {200u, 1000u, 5000u, 20000u}) {
    for (double h : {0.1, 0.03, 0.01, 0.003}) {
      const double err = std::abs(deterministic_excess(model_a, config(1.8, big_n, h)) - exact_a(1.8));
      const double band = level_band_measure(model_a, 1.8, h);
      EXPECT_LE(err, 2 * band + 2.0 / big_n) << big_n << " " << h;
    }
  }
  // Regular roots: band measure is about 2 h / |mu'| per root, two roots.
  const double m1 = level_band_measure(model_a, 1.8, 0.02);
  const double m2 = level_band_measure(model_a, 1.8, 0.01);
  EXPECT_NEAR(m1 / m2, 2.0, 0.2);
}

TEST(Excess, ErrorHalvesWithFinerSmoothing) {
  double prev = 1.0;
  for (int k = 0; k < 4; ++k) {
    const std::size_t big_n = 1000u << k;
    const double h = 0.04 / (1 << k);
    const double err = std::abs(deterministic_excess(model_a, config(1.3, big_n, h)) - exact_a(1.3));
    EXPECT_LE(err, prev / 2 + 1e-6);
    prev = err;
  }
}

TEST(Excess, AverageTrend) {
  const auto grid = anchor_grid(20000);
  const MeanFit line = plug_in_fit([](double t) { return t; }, grid);
  EXPECT_NEAR(excess_vs_average_trend(line, 0.5, config(0.25, 20000, 1e-5)), 0.5, 1e-3);
  EXPECT_NEAR(excess_vs_average_trend(line, 0.5, config(0.6, 20000, 1e-5)), 0.15, 1e-3);
  const MeanFit flat = plug_in_fit([](double) { return 1.0; }, grid);
  EXPECT_EQ(excess_vs_average_trend(flat, 0.3, config(0.1, 20000, 0.01)), 0.0);
  try {
    excess_vs_average_trend(line, 1.0, config(0.1, 20000, 0.01));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidWindow);
  }
}

TEST(Excess, RelativeExcess) {
  const auto grid = anchor_grid(20000);
  const MeanFit ramp = plug_in_fit([](double t) { return 1.0 + t; }, grid);
  EXPECT_NEAR(relative_excess(ramp, config(0.5, 20000, 1e-5)), 0.5, 1e-3);
  const MeanFit flat = plug_in_fit([](double) { return 3.0; }, grid);
  EXPECT_EQ(relative_excess(flat, config(0.2, 20000, 0.01)), 0.0);
  const MeanFit zero = plug_in_fit([](double t) { return t; }, grid);
  try {
    relative_excess(zero, config(0.2, 20000, 0.01));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroBaseline);
  }
}
