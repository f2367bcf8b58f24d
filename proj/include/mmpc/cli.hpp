#pragma once

// Command implementations behind the mmpc executable. Each command writes
// human-readable output to `out` and problems to `err`, then returns the
// process exit code.

#include "mmpc/maxmin.hpp"
#include "mmpc/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mmpc::cli {

struct RunConfig {
  int antennas = 100;
  int users = 10;
  int coherence = 200;
  std::optional<int> pilot_length;  // K when unset
  double cell_radius = 500.0;
  double min_distance = 100.0;
  double pathloss_exponent = 3.76;
  double edge_snr_db = -10.0;
  std::optional<double> energy_budget;  // edge_snr * T when unset
  int num_drops = 1000;
  std::uint64_t seed = 1;
  std::vector<Scheme> schemes = all_schemes();
  std::string out = "out";
  Mode mode = Mode::Joint;
  Utility utility = Utility::MaxMin;
  int threads = 0;
  double gp_gap_tolerance = 1e-9;
  int gp_max_newton = 200;
  int sca_max_iterations = 50;
  double sca_tolerance = 1e-6;
  int tau_extra = 12;
  std::vector<double> beta;  // solve / sweep-tau instance
  std::string csv;           // optional CSV path for solve / sweep-tau

  bool operator==(const RunConfig&) const = default;

  SystemConfig system() const;
  DropConfig drops() const;
  CampaignConfig campaign() const;
  gp::SolverOptions solver_options() const;
  ScaOptions sca_options() const;
  /// Throws ConfigError naming the field.
  void validate() const;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Keys accepted in config files and by `--set`.
const std::vector<std::string>& config_keys();

/// Applies one `key = value` assignment. Throws ConfigError on unknown keys
/// or malformed values.
void set_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Parses `key = value` lines (`#` starts a comment), then applies the
/// overrides in order, then validates. Errors carry the line number.
RunConfig parse_config(const std::string& text,
                       const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Every key, one per line, doubles printed with 17 significant digits so
/// parsing the output reproduces the config exactly.
std::string serialize_config(const RunConfig& cfg);

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_campaign(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep_tau(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Writes the campaign CSVs plus summary.txt and plots.txt into `dir`.
/// CDF files are named cdf_<metric>_<scheme>.csv.
void write_campaign(const CampaignResult& result, const std::filesystem::path& dir);

struct SuiteResult {
  std::string name;
  std::string tolerance;
  bool passed = false;
  std::string detail;
};

/// The four verification suites run by `verify`.
SuiteResult verify_grid_equivalence(const RunConfig& cfg);
SuiteResult verify_monomial_approximation(const RunConfig& cfg);
SuiteResult verify_training_length(const RunConfig& cfg);
SuiteResult verify_estimator(const RunConfig& cfg);

}  // namespace mmpc::cli
