#pragma once

// Independent reference computations: exhaustive search over pilot
// fractions for a handful of users, and Monte Carlo statistics of the MMSE
// channel estimate.

#include "mmpc/maxmin.hpp"
#include "mmpc/model.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace mmpc::oracle {

/// Pilot fractions rho = tau_p p_p / E_max, spaced uniformly in logit(rho)
/// so both ends of (0, 1) are resolved.
struct GridSpec {
  int points = 400;
  double rho_min = 1e-4;
  double rho_max = 1.0 - 1e-4;

  void validate() const;
};

std::vector<double> pilot_fraction_grid(const GridSpec& grid);

/// Allocation with every budget spent: p_p = rho E / tau_p,
/// p_u = (1 - rho) E / (T - tau_p).
PowerAllocation allocation_from_fractions(const Eigen::VectorXd& rho, const SystemConfig& cfg);

struct GridResult {
  PowerAllocation alloc;
  Eigen::VectorXd rho;
  double utility = 0.0;  // min SE or sum SE, bit/s/Hz
  double min_sinr = 0.0;
};

/// Exhaustive maximum over grid^K; refuses K > 3.
GridResult grid_search(const LargeScaleFading& fading, const SystemConfig& cfg, Utility utility,
                       const GridSpec& grid = {});

/// One channel draw: g ~ CN(0, beta I_M), pilot noise ~ CN(0, I_M) after
/// despreading, and the MMSE estimate from y = sqrt(tau_p p_p) g + n.
struct ChannelSample {
  Eigen::VectorXcd g;
  Eigen::VectorXcd g_hat;
  Eigen::VectorXcd noise;
};

/// MMSE estimate of g from the despread pilot observation y.
Eigen::VectorXcd mmse_estimate(const Eigen::VectorXcd& y, double pilot_power, double beta,
                               int pilot_length);

struct EstimatorStats {
  double estimate_variance = 0.0;  // per antenna, sample mean of |g_hat_m|^2
  double target_variance = 0.0;
  double inverse_moment = 0.0;  // sample mean of 1 / ||g_hat||^2
  double target_inverse_moment = 0.0;
  /// |sample E[g_hat^H e]| / sqrt(E||g_hat||^2 E||e||^2) with e = g - g_hat.
  double correlation = 0.0;
  int samples = 0;
};

/// Complex normals use independent real and imaginary parts of variance 1/2
/// (times beta for the channel) drawn from a seeded mt19937_64.
EstimatorStats validate_estimator(int antennas, double beta, double pilot_power,
                                  int pilot_length, int num_samples, std::uint64_t seed = 1);

}  // namespace mmpc::oracle
