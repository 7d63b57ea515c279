#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "relchange/simulate.hpp"
#include "relchange/testing.hpp"

namespace relchange::cli {

enum class Command { kTest, kEstimate, kSimulate, kPower, kLrv };
enum class Format { kJson, kCsv };

Command command_from_string(const std::string& name);
Format format_from_string(const std::string& name);

/// Exit codes shared by every command.
inline constexpr int kExitAccept = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDegenerateAccept = 2;
inline constexpr int kExitReject = 3;

struct RunConfig {
  Command command = Command::kTest;
  std::optional<std::filesystem::path> input;
  std::optional<std::string> model;  // "<mean>,<error>", e.g. "a,I"
  std::size_t n = 500;

  double c = 1.0;
  double delta = 0.1;
  double alpha = 0.05;
  std::string side = "plus";

  std::optional<double> bandwidth;  // fixed b_n, GCV otherwise
  std::optional<std::size_t> band;  // GCV covariance band
  std::optional<double> h_d;
  std::optional<std::size_t> grid_size;  // N

  std::optional<std::size_t> lrv_m;
  std::optional<double> lrv_tau;
  bool lrv_auto = false;

  bool multivariate = false;
  std::size_t mc_draws = 2000;

  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<std::string> preset;
  std::vector<double> a_grid;

  std::optional<std::filesystem::path> output;
  std::optional<Format> format;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;

  TestConfig test_config() const;
};

/// Overwrites the fields present in `doc`; keys are the long flag names
/// with dashes, e.g. {"c": 1.82, "lrv-m": 4}. Unknown keys are an error.
void apply_json(RunConfig& config, const nlohmann::json& doc);

/// One CSV row per experiment cell.
struct ExperimentRow {
  std::string b_mode;
  McReport report;
};

std::vector<ExperimentRow> run_experiments(const RunConfig& config, std::ostream& log);

std::string experiments_csv(const std::vector<ExperimentRow>& rows);
std::string experiments_json(const std::vector<ExperimentRow>& rows);

/// Executes the command, writes its document to `out` and progress to
/// `log`, and returns the exit code. Errors propagate as exceptions.
int run(const RunConfig& config, std::ostream& out, std::ostream& log);

/// `run` with exceptions mapped to kExitError and reported on `log`.
int run_guarded(const RunConfig& config, std::ostream& out, std::ostream& log);

}  // namespace relchange::cli
