#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "csv_input.hpp"
#include "relchange/error.hpp"
#include "relchange/excess.hpp"
#include "relchange/extensions.hpp"
#include "relchange/lrv.hpp"
#include "relchange/parallel.hpp"
#include "relchange/regression.hpp"

namespace relchange::cli {

namespace {

constexpr std::size_t kDefaultReps = 2000;

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  return out;
}

std::pair<std::string, std::string> split_model(const std::string& model) {
  const auto comma = model.find(',');
  if (comma == std::string::npos) {
    fail(ErrorCode::kConfigError, "model must look like '<mean>,<error>', got '" + model + "'");
  }
  return {model.substr(0, comma), model.substr(comma + 1)};
}

std::string b_mode(const TestConfig& cfg) {
  return cfg.bandwidth_mode == BandwidthMode::kGcv ? "gcv" : "fixed:" + number(cfg.bandwidth);
}

struct Cell {
  MeanModel mean;
  ErrorModel error;
  TestConfig config;
};

TestConfig preset_config(double c, double delta, double alpha, std::optional<double> b) {
  TestConfig cfg;
  cfg.level_c = c;
  cfg.delta = delta;
  cfg.alpha = alpha;
  if (b) {
    cfg.bandwidth_mode = BandwidthMode::kFixed;
    cfg.bandwidth = *b;
  }
  return cfg;
}

std::vector<Cell> preset_cells(const std::string& name) {
  std::vector<Cell> cells;
  const auto ai = [] { return std::pair{mean_model_a(), error_model_i()}; };
  if (name == "table1") {
    for (const char* label : {"a,I", "a,II", "b,I", "b,II"}) {
      const auto [mean, error] = split_model(label);
      cells.push_back({mean_model_by_name(mean), error_model_by_name(error),
                       preset_config(1.8, 0.3, 0.05, std::nullopt)});
    }
  } else if (name == "table2") {
    for (double delta : {0.3, 0.15}) {
      for (const char* label : {"a,I", "b,I", "a,II", "b,II"}) {
        const auto [mean, error] = split_model(label);
        const double c = mean == "a" ? (delta == 0.3 ? 1.82 : 1.955) : (delta == 0.3 ? 1.672 : 1.78);
        cells.push_back({mean_model_by_name(mean), error_model_by_name(error),
                         preset_config(c, delta, 0.05, std::nullopt)});
      }
    }
  } else if (name == "fig3" || name == "fig3-left" || name == "fig3-right") {
    if (name != "fig3-right") {
      for (double delta : linspace(0.05, 0.4, 6)) {
        const auto [mean, error] = ai();
        cells.push_back({mean, error, preset_config(1.82, delta, 0.1, 0.2)});
      }
    }
    if (name != "fig3-left") {
      for (double c : linspace(1.44, 2.0, 6)) {
        const auto [mean, error] = ai();
        cells.push_back({mean, error, preset_config(c, 0.3, 0.1, 0.2)});
      }
    }
  } else if (name == "fig4") {
    for (double a : linspace(7.5, 9.5, 6)) {
      cells.push_back({mean_model_power(a), error_model_i(), preset_config(1.82, 0.3, 0.1, 0.2)});
    }
  } else {
    fail(ErrorCode::kConfigError, "unknown preset '" + name + "'");
  }
  return cells;
}

void log_tuning(std::ostream& log, double b, const ExcessConfig& excess, const LrvTuning& lrv) {
  log << "b_n=" << b << " h_d=" << excess.h_d << " N=" << excess.knots << " m=" << lrv.block
      << " tau=" << lrv.tau << '\n';
}

int test_exit_code(const TestOutcome& out) {
  if (out.reject) return kExitReject;
  return out.degenerate_variance ? kExitDegenerateAccept : kExitAccept;
}

const TimeSeries& univariate(const Dataset& data, const char* command) {
  if (const auto* s = std::get_if<TimeSeries>(&data)) return *s;
  fail(ErrorCode::kConfigError, std::string(command) + " expects a single value column");
}

std::string estimate_document(const TimeSeries& series, const RunConfig& config, Format format,
                              std::ostream& log) {
  const TestConfig cfg = config.test_config();
  const double b = resolve_bandwidth(series, cfg);
  const ExcessConfig excess = cfg.excess_config(series.size(), b);
  const auto grid = anchor_grid(excess.knots);
  const MeanFit fit = jackknife_fit(series, grid, b, cfg.kernel);
  const ExcessEstimate corrected = estimate_excess(fit, excess);
  const ExcessEstimate plain = estimate_excess(fit.mu_hat, excess);
  log << "b_n=" << b << " h_d=" << excess.h_d << " N=" << excess.knots << '\n';

  if (format == Format::kCsv) {
    std::string csv = "t,mu_tilde,mu_hat\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      csv += number(grid[i]) + ',' + number(fit.mu_tilde[i]) + ',' + number(fit.mu_hat[i]) + '\n';
    }
    return csv;
  }
  auto measures = [](const ExcessEstimate& e) {
    return nlohmann::ordered_json{{"t_plus", e.t_plus}, {"t_minus", e.t_minus}, {"t_total", e.t_total}};
  };
  nlohmann::ordered_json doc = {
      {"bandwidth", b},
      {"knots", excess.knots},
      {"h_d", excess.h_d},
      {"c", excess.level_c},
      {"corrected", measures(corrected)},
      {"uncorrected", measures(plain)},
      {"fit", {{"t", grid}, {"mu_tilde", fit.mu_tilde}, {"mu_hat", fit.mu_hat}}},
  };
  return doc.dump(2) + '\n';
}

std::string lrv_document(const TimeSeries& series, const RunConfig& config, Format format,
                         std::ostream& log) {
  const TestConfig cfg = config.test_config();
  const LrvTuning tuning = resolve_lrv_tuning(series, cfg);
  const auto grid = design_grid(series.size());
  const LrvCurve curve = lrv_estimate(series, tuning.block, tuning.tau, cfg.kernel, grid);
  log << "m=" << tuning.block << " tau=" << tuning.tau << '\n';
  if (format == Format::kCsv) {
    std::string csv = "t,sigma2\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      csv += number(grid[i]) + ',' + number(curve.sigma2[i]) + '\n';
    }
    return csv;
  }
  nlohmann::ordered_json doc = {
      {"m", tuning.block}, {"tau", tuning.tau}, {"t", curve.grid}, {"sigma2", curve.sigma2}};
  return doc.dump(2) + '\n';
}

void emit(const RunConfig& config, const std::string& document, std::ostream& out) {
  if (!config.output) {
    out << document;
    return;
  }
  std::ofstream file(*config.output, std::ios::binary);
  if (!file) fail(ErrorCode::kConfigError, "cannot write '" + config.output->string() + "'");
  file << document;
}

}  // namespace

Command command_from_string(const std::string& name) {
  if (name == "test") return Command::kTest;
  if (name == "estimate") return Command::kEstimate;
  if (name == "simulate") return Command::kSimulate;
  if (name == "power") return Command::kPower;
  if (name == "lrv") return Command::kLrv;
  fail(ErrorCode::kConfigError, "unknown command '" + name + "'");
}

Format format_from_string(const std::string& name) {
  if (name == "json") return Format::kJson;
  if (name == "csv") return Format::kCsv;
  fail(ErrorCode::kConfigError, "format must be json or csv, got '" + name + "'");
}

void RunConfig::validate() const {
  const bool experiment = command == Command::kSimulate || command == Command::kPower;
  if (!experiment && !input) fail(ErrorCode::kConfigError, "--input is required");
  if (experiment) {
    if (!seed) fail(ErrorCode::kConfigError, "--seed is required for simulate and power");
    if (reps && *reps < 100) {
      fail(ErrorCode::kConfigError, "--reps must be at least 100, got " + std::to_string(*reps));
    }
    if (!preset && command == Command::kSimulate && !model) {
      fail(ErrorCode::kConfigError, "simulate needs --model or --preset");
    }
    if (!preset && command == Command::kPower && a_grid.empty()) {
      fail(ErrorCode::kConfigError, "power needs --a-grid or --preset");
    }
  }
  if (lrv_auto && (lrv_m || lrv_tau)) {
    fail(ErrorCode::kConfigError, "--lrv-auto cannot be combined with --lrv-m/--lrv-tau");
  }
  if (lrv_m.has_value() != lrv_tau.has_value()) {
    fail(ErrorCode::kConfigError, "--lrv-m and --lrv-tau must be given together");
  }
  if (mc_draws < 1000) fail(ErrorCode::kConfigError, "--mc-draws must be at least 1000");
  if (bandwidth && !(*bandwidth > 0.0 && *bandwidth <= 0.5)) {
    fail(ErrorCode::kConfigError, "--bandwidth must lie in (0, 0.5]");
  }
  test_config().validate();
}

TestConfig RunConfig::test_config() const {
  TestConfig cfg;
  cfg.level_c = c;
  cfg.delta = delta;
  cfg.alpha = alpha;
  cfg.side = side_from_string(side);
  if (bandwidth) {
    cfg.bandwidth_mode = BandwidthMode::kFixed;
    cfg.bandwidth = *bandwidth;
  }
  cfg.covariance_band = band;
  cfg.knots = grid_size;
  cfg.h_d = h_d;
  if (lrv_auto) {
    cfg.lrv_mode = LrvMode::kAuto;
  } else if (lrv_m && lrv_tau) {
    cfg.lrv_mode = LrvMode::kFixed;
    cfg.lrv_tuning = {*lrv_m, *lrv_tau};
  }
  return cfg;
}

void apply_json(RunConfig& config, const nlohmann::json& doc) {
  if (!doc.is_object()) fail(ErrorCode::kConfigError, "config file must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "command") config.command = command_from_string(value.get<std::string>());
      else if (key == "input") config.input = value.get<std::string>();
      else if (key == "model") config.model = value.get<std::string>();
      else if (key == "n") config.n = value.get<std::size_t>();
      else if (key == "c") config.c = value.get<double>();
      else if (key == "delta") config.delta = value.get<double>();
      else if (key == "alpha") config.alpha = value.get<double>();
      else if (key == "side") config.side = value.get<std::string>();
      else if (key == "bandwidth") config.bandwidth = value.get<double>();
      else if (key == "band") config.band = value.get<std::size_t>();
      else if (key == "hd") config.h_d = value.get<double>();
      else if (key == "grid-size") config.grid_size = value.get<std::size_t>();
      else if (key == "lrv-m") config.lrv_m = value.get<std::size_t>();
      else if (key == "lrv-tau") config.lrv_tau = value.get<double>();
      else if (key == "lrv-auto") config.lrv_auto = value.get<bool>();
      else if (key == "multivariate") config.multivariate = value.get<bool>();
      else if (key == "mc-draws") config.mc_draws = value.get<std::size_t>();
      else if (key == "seed") config.seed = value.get<std::uint64_t>();
      else if (key == "reps") config.reps = value.get<std::size_t>();
      else if (key == "preset") config.preset = value.get<std::string>();
      else if (key == "a-grid") config.a_grid = value.get<std::vector<double>>();
      else if (key == "output") config.output = value.get<std::string>();
      else if (key == "format") config.format = format_from_string(value.get<std::string>());
      else fail(ErrorCode::kConfigError, "unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kConfigError, "config key '" + key + "': " + e.what());
    }
  }
}

std::vector<ExperimentRow> run_experiments(const RunConfig& config, std::ostream& log) {
  config.validate();
  const std::uint64_t seed = *config.seed;
  const std::size_t reps = config.reps.value_or(kDefaultReps);
  std::vector<ExperimentRow> rows;

  if (!config.preset && config.command == Command::kPower) {
    const auto [mean, error] = split_model(config.model.value_or("power,I"));
    if (mean != "power") fail(ErrorCode::kConfigError, "power expects --model power,<error>");
    const TestConfig cfg = config.test_config();
    for (auto& point :
         run_power_curve(config.a_grid, error_model_by_name(error), config.n, cfg, reps, seed)) {
      log << point.report.label << " rejection_rate=" << point.report.rejection_rate << '\n';
      rows.push_back({b_mode(cfg), std::move(point.report)});
    }
    return rows;
  }

  std::vector<Cell> cells;
  if (config.preset) {
    cells = preset_cells(*config.preset);
  } else {
    const auto [mean, error] = split_model(*config.model);
    cells.push_back({mean_model_by_name(mean), error_model_by_name(error), config.test_config()});
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Cell& cell = cells[k];
    const std::uint64_t row_seed = config.preset ? derive_seed(seed, k) : seed;
    McReport report =
        run_level_experiment(cell.mean, cell.error, config.n, cell.config, reps, row_seed);
    log << report.label << " c=" << cell.config.level_c << " delta=" << cell.config.delta
        << " rejection_rate=" << report.rejection_rate << '\n';
    rows.push_back({b_mode(cell.config), std::move(report)});
  }
  return rows;
}

std::string experiments_csv(const std::vector<ExperimentRow>& rows) {
  std::string csv =
      "model,n,c,delta,alpha,b_mode,reps,rejection_rate,bias,sd,seed,"
      "bias_uncorrected,sd_uncorrected,mean_bandwidth\n";
  for (const auto& row : rows) {
    const McReport& r = row.report;
    csv += '"' + r.label + "\"," + std::to_string(r.n) + ',' + number(r.config.level_c) + ',' +
           number(r.config.delta) + ',' + number(r.config.alpha) + ',' + row.b_mode + ',' +
           std::to_string(r.replications) + ',' + number(r.rejection_rate) + ',' + number(r.bias) +
           ',' + number(r.sd) + ',' + std::to_string(r.seed) + ',' + number(r.bias_uncorrected) +
           ',' + number(r.sd_uncorrected) + ',' + number(r.mean_bandwidth) + '\n';
  }
  return csv;
}

std::string experiments_json(const std::vector<ExperimentRow>& rows) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    const McReport& r = row.report;
    doc.push_back({{"model", r.label},
                   {"n", r.n},
                   {"c", r.config.level_c},
                   {"delta", r.config.delta},
                   {"alpha", r.config.alpha},
                   {"b_mode", row.b_mode},
                   {"reps", r.replications},
                   {"rejection_rate", r.rejection_rate},
                   {"bias", r.bias},
                   {"sd", r.sd},
                   {"seed", r.seed},
                   {"bias_uncorrected", r.bias_uncorrected},
                   {"sd_uncorrected", r.sd_uncorrected},
                   {"mean_bandwidth", r.mean_bandwidth}});
  }
  return doc.dump(2) + '\n';
}

int run(const RunConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  switch (config.command) {
    case Command::kSimulate:
    case Command::kPower: {
      const auto rows = run_experiments(config, log);
      const Format format = config.format.value_or(Format::kCsv);
      emit(config, format == Format::kCsv ? experiments_csv(rows) : experiments_json(rows), out);
      return kExitAccept;
    }
    case Command::kEstimate: {
      const Dataset data = ingest_csv(*config.input);
      emit(config,
           estimate_document(univariate(data, "estimate"), config,
                             config.format.value_or(Format::kJson), log),
           out);
      return kExitAccept;
    }
    case Command::kLrv: {
      const Dataset data = ingest_csv(*config.input);
      emit(config,
           lrv_document(univariate(data, "lrv"), config, config.format.value_or(Format::kJson), log),
           out);
      return kExitAccept;
    }
    case Command::kTest: {
      if (config.format == Format::kCsv) fail(ErrorCode::kConfigError, "test writes JSON only");
      const Dataset data = ingest_csv(*config.input);
      const TestConfig cfg = config.test_config();
      TestOutcome outcome;
      if (const auto* series = std::get_if<TimeSeries>(&data); series && !config.multivariate) {
        outcome = run_test(*series, cfg);
      } else {
        const MultiSeries multi = series ? MultiSeries(series->size(), 1,
                                                       std::vector<double>(series->values().begin(),
                                                                           series->values().end()))
                                         : std::get<MultiSeries>(data);
        outcome = multivariate_test(multi, cfg, config.mc_draws, config.seed.value_or(0));
      }
      log_tuning(log, outcome.bandwidth, outcome.estimate.config, outcome.lrv_tuning);
      emit(config, to_json(outcome) + '\n', out);
      return test_exit_code(outcome);
    }
  }
  return kExitError;
}

int run_guarded(const RunConfig& config, std::ostream& out, std::ostream& log) {
  try {
    return run(config, out, log);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace relchange::cli
