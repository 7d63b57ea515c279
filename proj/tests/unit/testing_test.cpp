#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "json.hpp"
#include "oracles.hpp"
#include "relchange/error.hpp"
#include "relchange/testing.hpp"

using namespace relchange;

namespace {

double model_a(double t) { return 8.0 * (0.25 - (t - 0.5) * (t - 0.5)); }

ExcessConfig excess(double c, std::size_t knots, double h, double b) {
  ExcessConfig cfg;
  cfg.level_c = c;
  cfg.knots = knots;
  cfg.h_d = h;
  cfg.b_n = b;
  return cfg;
}

oracle::Weights to_oracle(Side s) {
  switch (s) {
    case Side::kPlus: return oracle::Weights::kPlus;
    case Side::kMinus: return oracle::Weights::kMinus;
    case Side::kTwoSided: return oracle::Weights::kTwoSided;
  }
  return oracle::Weights::kPlus;
}

TimeSeries noisy(std::size_t n, double sd, std::uint64_t seed,
                 const std::function<double(double)>& mu) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, sd);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = mu(static_cast<double>(i + 1) / n) + z(rng);
  return TimeSeries(std::move(v));
}

}  // namespace

TEST(VBar, PlugInModelAMatchesNaive) {
  const std::size_t n = 200;
  MeanFit fit = plug_in_fit(model_a, anchor_grid(n), 0.2);
  const std::vector<double> s2(n, 1.0);
  const ExcessConfig cfg = excess(1.8, n, 0.5 / std::sqrt(200.0), 0.2);
  const double pruned = v_bar(fit, s2, cfg, Side::kPlus);
  const double naive = oracle::v_bar_naive(fit.mu_tilde, s2, 0.2, 1.8, cfg.h_d, oracle::Weights::kPlus);
  ASSERT_GT(naive, 0.0);
  EXPECT_NEAR(pruned, naive, 1e-9 * naive);
}

TEST(VBar, RandomConfigurationsMatchNaive) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 40 + static_cast<std::size_t>(u(rng) * 160);
    const double b = 0.08 + 0.3 * u(rng);
    const double h = 0.02 + 0.2 * u(rng);
    const double c = 0.3 + u(rng);
    const double amp = 1.0 + 3.0 * u(rng);
    const double phase = u(rng);
    MeanFit fit = plug_in_fit(
        [&](double t) { return amp * std::sin(2 * 3.14159 * (t + phase)) + 0.1 * std::cos(17 * t); },
        anchor_grid(n), b);
    std::vector<double> s2(n);
    for (auto& v : s2) v = 0.1 + u(rng);
    const Side side = static_cast<Side>(trial % 3);
    const ExcessConfig cfg = excess(c, n, h, 0.0);
    const double pruned = v_bar(fit, s2, cfg, side);
    const double naive = oracle::v_bar_naive(fit.mu_tilde, s2, b, c, h, to_oracle(side));
    EXPECT_NEAR(pruned, naive, 1e-9 * std::max(naive, 1e-300)) << trial;
  }
}

TEST(VBar, Degenerate) {
  const MeanFit flat = plug_in_fit([](double) { return 1.0; }, anchor_grid(100), 0.2);
  const std::vector<double> ones(100, 1.0), zeros(100, 0.0);
  EXPECT_EQ(v_bar(flat, ones, excess(0.5, 100, 0.05, 0.2), Side::kTwoSided), 0.0);
  const MeanFit a = plug_in_fit(model_a, anchor_grid(100), 0.2);
  EXPECT_EQ(v_bar(a, zeros, excess(1.8, 100, 0.05, 0.2), Side::kPlus), 0.0);
}

TEST(VBar, ScalesLinearlyInVariance) {
  const MeanFit a = plug_in_fit(model_a, anchor_grid(150), 0.2);
  std::vector<double> s2(150), s2x(150);
  for (std::size_t j = 0; j < 150; ++j) {
    s2[j] = 0.5 + 0.25 * std::sin(j * 0.1);
    s2x[j] = 4.0 * s2[j];
  }
  const ExcessConfig cfg = excess(1.8, 150, 0.05, 0.2);
  EXPECT_NEAR(v_bar(a, s2x, cfg, Side::kPlus), 4.0 * v_bar(a, s2, cfg, Side::kPlus),
              1e-12 * v_bar(a, s2x, cfg, Side::kPlus));
}

TEST(VBar, CurveOverloadInterpolates) {
  const MeanFit a = plug_in_fit(model_a, anchor_grid(100), 0.2);
  LrvCurve curve;
  curve.grid = {0.0, 1.0};
  curve.sigma2 = {1.0, 1.0};
  const std::vector<double> ones(100, 1.0);
  const ExcessConfig cfg = excess(1.8, 100, 0.05, 0.2);
  EXPECT_DOUBLE_EQ(v_bar(a, curve, 100, cfg, Side::kPlus), v_bar(a, ones, cfg, Side::kPlus));
}

TEST(Decide, NormalQuantileAndPValue) {
  TestOutcome out;
  out.v_bar = 4.0;
  out.statistic = 2.0 * 1.6448536269514722 + 1e-9;
  decide(out, 0.05);
  EXPECT_NEAR(out.quantile, 2.0 * 1.6448536269514722, 1e-12);
  EXPECT_TRUE(out.reject);
  EXPECT_LT(out.p_value, 0.05);
  out.statistic = 1.0;
  decide(out, 0.05);
  EXPECT_FALSE(out.reject);
  EXPECT_NEAR(out.p_value, 0.5 * std::erfc(0.5 / std::sqrt(2.0)), 1e-14);
}

TEST(Decide, DegenerateVariance) {
  TestOutcome out;
  out.v_bar = 0.0;
  out.statistic = -3.0;
  decide(out, 0.1);
  EXPECT_TRUE(out.degenerate_variance);
  EXPECT_EQ(out.quantile, 0.0);
  EXPECT_FALSE(out.reject);
  EXPECT_EQ(out.p_value, 1.0);
  out.statistic = 0.5;
  decide(out, 0.1);
  EXPECT_TRUE(out.reject);
  EXPECT_EQ(out.p_value, 0.0);
}

TEST(TestConfig, Validation) {
  TestConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  for (auto mutate : std::vector<std::function<void(TestConfig&)>>{
           [](TestConfig& c) { c.delta = 1.5; }, [](TestConfig& c) { c.delta = 0.0; },
           [](TestConfig& c) { c.alpha = 0.6; }, [](TestConfig& c) { c.level_c = -1; },
           [](TestConfig& c) {
             c.bandwidth_mode = BandwidthMode::kFixed;
             c.bandwidth = 0;
           }}) {
    TestConfig bad;
    mutate(bad);
    try {
      bad.validate();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfigError);
    }
  }
  EXPECT_EQ(side_from_string("two_sided"), Side::kTwoSided);
  EXPECT_THROW(side_from_string("both"), Error);
}

TEST(RunTest, PipelineIsConsistent) {
  const TimeSeries s = noisy(300, 0.2, 5, model_a);
  TestConfig cfg;
  cfg.level_c = 1.82;
  cfg.delta = 0.3;
  cfg.bandwidth_mode = BandwidthMode::kFixed;
  cfg.bandwidth = 0.2;
  const TestOutcome out = run_test(s, cfg);

  const ExcessConfig ex = cfg.excess_config(300, 0.2);
  const MeanFit fit = jackknife_fit(s, anchor_grid(300), 0.2, cfg.kernel);
  EXPECT_DOUBLE_EQ(out.estimate.t_plus, estimate_excess(fit, ex).t_plus);
  const double scale = 300.0 * 300.0 * 0.2 * ex.h_d;
  EXPECT_NEAR(out.statistic, scale * (out.estimate.t_plus - 0.3), 1e-9);
  EXPECT_EQ(out.reject, out.statistic > out.quantile);
  EXPECT_EQ(out.reject, out.p_value < cfg.alpha);
  EXPECT_EQ(out.lrv_tuning.block, default_tuning(300).block);
  EXPECT_GT(out.v_bar, 0.0);
}

TEST(RunTest, FlatSeriesAccepts) {
  TestConfig cfg;
  cfg.level_c = 1.0;
  cfg.delta = 0.1;
  cfg.side = Side::kTwoSided;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TestOutcome out = run_test(noisy(200, 0.05, seed, [](double) { return 0.0; }), cfg);
    EXPECT_FALSE(out.reject);
    EXPECT_EQ(out.estimate.t_total, 0.0);
  }
}

TEST(RunTest, MonotoneInDelta) {
  const TimeSeries s = noisy(300, 0.2, 8, model_a);
  TestConfig cfg;
  cfg.level_c = 1.82;
  cfg.bandwidth_mode = BandwidthMode::kFixed;
  bool rejected_before = true;
  for (double delta : {0.05, 0.1, 0.2, 0.3, 0.4, 0.6, 0.8}) {
    cfg.delta = delta;
    const TestOutcome out = run_test(s, cfg);
    if (!rejected_before) EXPECT_FALSE(out.reject) << delta;
    rejected_before = out.reject;
  }
}

TEST(RunTest, JsonDocument) {
  TestConfig cfg;
  cfg.level_c = 1.5;
  cfg.bandwidth_mode = BandwidthMode::kFixed;
  const TestOutcome out = run_test(noisy(200, 0.2, 2, model_a), cfg);
  const auto doc = nlohmann::json::parse(to_json(out));
  for (const char* key :
       {"statistic", "v_bar", "quantile", "p_value", "reject", "t_plus", "t_minus", "config"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  EXPECT_EQ(doc["statistic"].get<double>(), out.statistic);
  EXPECT_EQ(doc["config"]["side"], "plus");
  EXPECT_EQ(doc["config"]["lrv_m"], out.lrv_tuning.block);
}
