#pragma once

// Monte Carlo campaign over random user drops in an annular cell. Every
// requested scheme sees the same fading on a given drop.

#include "mmpc/gp.hpp"
#include "mmpc/model.hpp"
#include "mmpc/sumse.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mmpc {

enum class Scheme { MaxMinJoint, SumJoint, NoControl, MaxMinDataOnly, SumDataOnly };

const char* to_string(Scheme s);
std::optional<Scheme> scheme_from_string(const std::string& name);
const std::vector<Scheme>& all_schemes();

struct DropConfig {
  double cell_radius = 500.0;   // m
  double min_distance = 100.0;  // m
  double pathloss_exponent = 3.76;
  int num_drops = 1000;
  std::uint64_t seed = 1;
  double edge_snr_linear = 0.1;  // equal-power SNR of a user at the cell edge

  void validate() const;
};

/// Seed of the generator used for drop `index`: splitmix64 applied to the
/// campaign seed and then to the drop index, so each drop has its own stream.
std::uint64_t drop_seed(std::uint64_t seed, std::uint64_t index);
/// Uniform on [0, 1) from the top 53 bits of one draw.
double uniform53(std::mt19937_64& rng);

struct Drop {
  Eigen::VectorXd distances;  // m
  LargeScaleFading fading;    // normalized so a user at the cell edge has beta = 1
};

/// Distances are uniform over the annulus area,
/// r = sqrt(u (R^2 - r_min^2) + r_min^2), and beta_k = (R / r_k)^exponent.
Drop drop_users(std::mt19937_64& rng, const DropConfig& cfg, int users);

/// Normalized units (edge beta = 1): E_max = edge_snr T.
/// Raw units (beta = r^-exponent): E_max = edge_snr R^exponent T.
double compute_emax(const DropConfig& cfg, int coherence, bool normalized = true);

struct SchemeRecord {
  int drop = 0;
  PowerAllocation alloc;
  SeReport report;
  bool ok = true;
  std::string status;
  int iterations = 0;      // Newton steps (max-min) or SCA iterations (sum)
  double max_slack = 0.0;  // max_k |budget slack| / E_max
  double stationarity = 0.0;
  std::vector<double> objective_trace;  // sum schemes only
  bool converged = true;
};

struct SchemeResult {
  Scheme scheme = Scheme::NoControl;
  std::vector<SchemeRecord> records;  // ordered by drop index

  std::vector<double> sum_se() const;
  std::vector<double> min_se() const;
  std::vector<double> per_user_se() const;  // drop-major, then user
};

struct CampaignConfig {
  DropConfig drops;
  int antennas = 100;
  int users = 10;
  int coherence = 200;
  std::vector<Scheme> schemes = all_schemes();
  int threads = 1;  // 0 means hardware concurrency
  double max_failure_rate = 0.01;
  ScaOptions sca;

  SystemConfig system() const;
};

struct CampaignResult {
  SystemConfig system;
  std::vector<SchemeResult> schemes;  // in CampaignConfig::schemes order
  std::vector<int> failed_drops;      // excluded from every scheme
  std::vector<Drop> drops;            // kept drops, ordered by index

  const SchemeResult& scheme(Scheme s) const;
};

/// Evaluates every drop with every requested scheme. A drop on which any
/// solver fails is removed from all schemes. Throws std::runtime_error when
/// more than `max_failure_rate` of the drops fail. Results do not depend on
/// the thread count.
CampaignResult run_campaign(const CampaignConfig& cfg);

/// Nearest-rank empirical distribution.
struct CdfSummary {
  std::vector<double> sorted;

  /// Value at rank ceil(p n), clamped to [1, n].
  double percentile(double p) const;
  double median() const { return percentile(0.5); }
  /// Value exceeded with probability 0.95.
  double likely95() const { return percentile(0.05); }
};

CdfSummary empirical_cdf(std::vector<double> values);

}  // namespace mmpc
