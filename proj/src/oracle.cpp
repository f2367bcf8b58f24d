#include "mmpc/oracle.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace mmpc::oracle {

void GridSpec::validate() const {
  if (points < 10) throw std::invalid_argument("grid points must be >= 10");
  if (!(rho_min > 0.0 && rho_min < rho_max && rho_max < 1.0))
    throw std::invalid_argument("grid range must satisfy 0 < rho_min < rho_max < 1");
}

std::vector<double> pilot_fraction_grid(const GridSpec& grid) {
  grid.validate();
  auto logit = [](double r) { return std::log(r / (1.0 - r)); };
  const double lo = logit(grid.rho_min);
  const double hi = logit(grid.rho_max);
  std::vector<double> rho(static_cast<std::size_t>(grid.points));
  for (int i = 0; i < grid.points; ++i) {
    const double z = lo + (hi - lo) * i / (grid.points - 1);
    rho[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-z));
  }
  return rho;
}

PowerAllocation allocation_from_fractions(const Eigen::VectorXd& rho, const SystemConfig& cfg) {
  const double e = cfg.energy_budget;
  const double tau = cfg.pilot_length;
  const double data = cfg.coherence - cfg.pilot_length;
  return {(rho * (e / tau)).eval(), ((1.0 - rho.array()) * (e / data)).matrix()};
}

GridResult grid_search(const LargeScaleFading& fading, const SystemConfig& cfg, Utility utility,
                       const GridSpec& grid) {
  cfg.validate();
  fading.validate(cfg);
  const int K = cfg.users;
  if (K > 3) throw std::invalid_argument("grid search supports at most 3 users");
  const std::vector<double> rho = pilot_fraction_grid(grid);
  const auto n = static_cast<long>(rho.size());

  long total = 1;
  for (int k = 0; k < K; ++k) total *= n;

  GridResult best;
  best.utility = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd r(K);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int k = 0; k < K; ++k) {
      r(k) = rho[static_cast<std::size_t>(rem % n)];
      rem /= n;
    }
    const PowerAllocation a = allocation_from_fractions(r, cfg);
    const SeReport rep = se_report(a, fading, cfg);
    const double u = utility == Utility::MaxMin ? rep.min_se : rep.sum_se;
    if (u > best.utility) {
      best.utility = u;
      best.rho = r;
      best.alloc = a;
      best.min_sinr = rep.sinr.minCoeff();
    }
  }
  return best;
}

Eigen::VectorXcd mmse_estimate(const Eigen::VectorXcd& y, double pilot_power, double beta,
                               int pilot_length) {
  const double snr = pilot_length * pilot_power;
  return y * (std::sqrt(snr) * beta / (1.0 + snr * beta));
}

EstimatorStats validate_estimator(int antennas, double beta, double pilot_power,
                                  int pilot_length, int num_samples, std::uint64_t seed) {
  if (antennas < 2 || num_samples < 1 || !(beta > 0.0) || pilot_power < 0.0 || pilot_length < 1)
    throw std::invalid_argument("invalid estimator experiment");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  auto draw = [&](double variance) {
    Eigen::VectorXcd v(antennas);
    const double s = std::sqrt(variance);
    for (int m = 0; m < antennas; ++m) {
      const double re = normal(rng);
      const double im = normal(rng);
      v(m) = std::complex<double>(s * re, s * im);
    }
    return v;
  };

  EstimatorStats st;
  st.samples = num_samples;
  st.target_variance = mmse_estimate_variance(pilot_power, beta, pilot_length);
  st.target_inverse_moment = st.target_variance > 0.0
                                 ? 1.0 / ((antennas - 1) * st.target_variance)
                                 : std::numeric_limits<double>::infinity();
  const double amp = std::sqrt(pilot_length * pilot_power);
  double power_hat = 0.0, power_err = 0.0, inverse = 0.0;
  std::complex<double> cross = 0.0;
  for (int s = 0; s < num_samples; ++s) {
    ChannelSample c;
    c.g = draw(beta);
    c.noise = draw(1.0);
    c.g_hat = mmse_estimate(amp * c.g + c.noise, pilot_power, beta, pilot_length);
    const Eigen::VectorXcd err = c.g - c.g_hat;
    const double nh = c.g_hat.squaredNorm();
    power_hat += nh;
    power_err += err.squaredNorm();
    inverse += nh > 0.0 ? 1.0 / nh : std::numeric_limits<double>::infinity();
    cross += c.g_hat.dot(err);
  }
  const double ns = num_samples;
  st.estimate_variance = power_hat / (ns * antennas);
  st.inverse_moment = inverse / ns;
  const double denom = std::sqrt((power_hat / ns) * (power_err / ns));
  st.correlation = denom > 0.0 ? std::abs(cross / ns) / denom : 0.0;
  return st;
}

}  // namespace mmpc::oracle
