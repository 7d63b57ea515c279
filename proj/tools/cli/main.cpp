#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "commands.hpp"
#include "relchange/error.hpp"

namespace {

using relchange::cli::RunConfig;

// Binds a flag to a temporary and copies it into the config only when the
// flag was given, so --config values survive unless overridden.
template <class T, class Field>
void apply_if(CLI::Option* opt, const T& value, Field& field) {
  if (opt->count() > 0) field = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tests for relevant deviations of a time series mean from its initial value"};
  app.set_help_all_flag("--help-all");

  std::string command, input, model, side, preset, output, format, config_path;
  std::size_t n = 0, band = 0, grid_size = 0, lrv_m = 0, mc_draws = 0, reps = 0;
  double c = 0, delta = 0, alpha = 0, bandwidth = 0, h_d = 0, lrv_tau = 0;
  std::uint64_t seed = 0;
  std::vector<double> a_grid;

  app.add_option("command", command, "test | estimate | simulate | power | lrv")
      ->required()
      ->check(CLI::IsMember({"test", "estimate", "simulate", "power", "lrv"}));
  auto* o_config = app.add_option("--config", config_path, "JSON file with default flag values")
                       ->check(CLI::ExistingFile);
  auto* o_input = app.add_option("--input", input, "CSV with a header row and value columns");
  auto* o_model = app.add_option("--model", model, "simulation model '<mean>,<error>', e.g. a,I");
  auto* o_n = app.add_option("--n", n, "simulated sample size (default 500)");
  auto* o_c = app.add_option("--c", c, "level c > 0");
  auto* o_delta = app.add_option("--delta", delta, "time-fraction threshold in (0, 1)");
  auto* o_alpha = app.add_option("--alpha", alpha, "nominal level in (0, 0.5]");
  auto* o_side = app.add_option("--side", side, "plus | minus | two_sided");
  auto* o_bandwidth = app.add_option("--bandwidth", bandwidth, "fixed regression bandwidth (GCV if absent)");
  auto* o_band = app.add_option("--band", band, "covariance band for GCV whitening");
  auto* o_hd = app.add_option("--hd", h_d, "smoothed indicator bandwidth h_d");
  auto* o_grid = app.add_option("--grid-size", grid_size, "number of Riemann knots N (default n)");
  auto* o_lrv_m = app.add_option("--lrv-m", lrv_m, "LRV block length m");
  auto* o_lrv_tau = app.add_option("--lrv-tau", lrv_tau, "LRV smoothing bandwidth tau");
  auto* o_lrv_auto = app.add_flag("--lrv-auto", "pick (m, tau) by minimal volatility");
  auto* o_multi = app.add_flag("--multivariate", "treat the value columns as one vector series");
  auto* o_draws = app.add_option("--mc-draws", mc_draws, "multiplier draws for the multivariate quantile");
  auto* o_seed = app.add_option("--seed", seed, "master seed (required for simulate and power)");
  auto* o_reps = app.add_option("--reps", reps, "Monte Carlo replications per cell (default 2000)");
  auto* o_preset = app.add_option("--preset", preset, "table1 | table2 | fig3 | fig3-left | fig3-right | fig4");
  auto* o_a_grid = app.add_option("--a-grid", a_grid, "coefficients of the power family")->delimiter(',');
  auto* o_output = app.add_option("--output", output, "write the document here instead of stdout");
  auto* o_format = app.add_option("--format", format, "json | csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return relchange::cli::kExitError;
  }

  RunConfig cfg;
  try {
    if (o_config->count() > 0) {
      std::ifstream file(config_path);
      relchange::cli::apply_json(cfg, nlohmann::json::parse(file));
    }
    cfg.command = relchange::cli::command_from_string(command);
    if (o_input->count()) cfg.input = input;
    if (o_model->count()) cfg.model = model;
    apply_if(o_n, n, cfg.n);
    apply_if(o_c, c, cfg.c);
    apply_if(o_delta, delta, cfg.delta);
    apply_if(o_alpha, alpha, cfg.alpha);
    apply_if(o_side, side, cfg.side);
    if (o_bandwidth->count()) cfg.bandwidth = bandwidth;
    if (o_band->count()) cfg.band = band;
    if (o_hd->count()) cfg.h_d = h_d;
    if (o_grid->count()) cfg.grid_size = grid_size;
    if (o_lrv_m->count()) cfg.lrv_m = lrv_m;
    if (o_lrv_tau->count()) cfg.lrv_tau = lrv_tau;
    if (o_lrv_auto->count()) cfg.lrv_auto = true;
    if (o_multi->count()) cfg.multivariate = true;
    apply_if(o_draws, mc_draws, cfg.mc_draws);
    if (o_seed->count()) cfg.seed = seed;
    if (o_reps->count()) cfg.reps = reps;
    if (o_preset->count()) cfg.preset = preset;
    apply_if(o_a_grid, a_grid, cfg.a_grid);
    if (o_output->count()) cfg.output = output;
    if (o_format->count()) cfg.format = relchange::cli::format_from_string(format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return relchange::cli::kExitError;
  }
  return relchange::cli::run_guarded(cfg, std::cout, std::cerr);
}
