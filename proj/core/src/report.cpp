#include <string>

#include "json.hpp"

#include "relchange/testing.hpp"

namespace relchange {

std::string to_json(const TestOutcome& outcome) {
  const TestConfig& cfg = outcome.config;
  const ExcessConfig& excess = outcome.estimate.config;
  nlohmann::ordered_json config = {
      {"c", cfg.level_c},
      {"delta", cfg.delta},
      {"alpha", cfg.alpha},
      {"side", to_string(cfg.side)},
      {"bandwidth_mode", cfg.bandwidth_mode == BandwidthMode::kGcv ? "gcv" : "fixed"},
      {"bandwidth", outcome.bandwidth},
      {"knots", excess.knots},
      {"h_d", excess.h_d},
      {"lrv_m", outcome.lrv_tuning.block},
      {"lrv_tau", outcome.lrv_tuning.tau},
      {"kernel", std::string(cfg.kernel.name())},
      {"degenerate_variance", outcome.degenerate_variance},
  };
  nlohmann::ordered_json doc = {
      {"statistic", outcome.statistic},
      {"v_bar", outcome.v_bar},
      {"quantile", outcome.quantile},
      {"p_value", outcome.p_value},
      {"reject", outcome.reject},
      {"t_plus", outcome.estimate.t_plus},
      {"t_minus", outcome.estimate.t_minus},
      {"config", config},
  };
  return doc.dump(2);
}

}  // namespace relchange
