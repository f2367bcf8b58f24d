#pragma once

// Single-cell uplink massive MIMO model with MMSE channel estimation and MRC
// detection. Noise variance is normalized to 1 throughout, so every power and
// every large-scale coefficient is expressed in noise-normalized units.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mmpc {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Cell-level constants. `tau_p` is the pilot length and defaults to K at
/// every optimizer call site, since K pilot symbols are optimal for any
/// increasing utility.
struct SystemConfig {
  int antennas = 100;         // M
  int users = 10;             // K
  int coherence = 200;        // T
  int pilot_length = 10;      // tau_p
  double energy_budget = 20;  // E_max

  /// Throws std::invalid_argument naming the offending field.
  void validate() const {
    if (antennas < 2) throw std::invalid_argument("antennas (M) must be >= 2");
    if (users < 1) throw std::invalid_argument("users (K) must be >= 1");
    if (pilot_length < users)
      throw std::invalid_argument("pilot_length (tau_p) must be >= users (K)");
    if (pilot_length >= coherence)
      throw std::invalid_argument("pilot_length (tau_p) must be < coherence (T)");
    if (!(energy_budget > 0) || !std::isfinite(energy_budget))
      throw std::invalid_argument("energy_budget (E_max) must be positive and finite");
  }

  /// Fraction of the coherence interval left for payload, 1 - tau_p/T.
  double prelog() const {
    return 1.0 - static_cast<double>(pilot_length) / static_cast<double>(coherence);
  }

  /// Copy with tau_p = K.
  SystemConfig with_minimal_pilots() const {
    SystemConfig c = *this;
    c.pilot_length = users;
    return c;
  }
};

/// Per-user large-scale fading coefficients beta_k (linear scale).
template <typename Scalar>
struct LargeScaleFadingT {
  Vec<Scalar> beta;

  LargeScaleFadingT() = default;
  explicit LargeScaleFadingT(Vec<Scalar> b) : beta(std::move(b)) {}

  Eigen::Index size() const { return beta.size(); }

  void validate(const SystemConfig& cfg) const {
    if (beta.size() != cfg.users)
      throw std::invalid_argument("fading: expected " + std::to_string(cfg.users) +
                                  " coefficients, got " + std::to_string(beta.size()));
    for (Eigen::Index k = 0; k < beta.size(); ++k)
      if (!(beta(k) > Scalar(0)) || !std::isfinite(static_cast<double>(beta(k))))
        throw std::invalid_argument("fading: beta[" + std::to_string(k) +
                                    "] must be positive and finite");
  }
};

/// Per-user pilot power p_p^k and payload power p_u^k.
template <typename Scalar>
struct PowerAllocationT {
  Vec<Scalar> pilot;
  Vec<Scalar> payload;

  Eigen::Index size() const { return pilot.size(); }

  /// Dimensions and sign only; the energy budget is checked by
  /// within_budget() because scale-transformed allocations are legitimately
  /// evaluated against a different budget.
  void validate(const SystemConfig& cfg) const {
    if (pilot.size() != cfg.users || payload.size() != cfg.users)
      throw std::invalid_argument("allocation: dimension does not match K");
    if ((pilot.array() < Scalar(0)).any() || (payload.array() < Scalar(0)).any())
      throw std::invalid_argument("allocation: powers must be nonnegative");
    if (!pilot.allFinite() || !payload.allFinite())
      throw std::invalid_argument("allocation: powers must be finite");
  }
};

using LargeScaleFading = LargeScaleFadingT<double>;
using PowerAllocation = PowerAllocationT<double>;

/// Relative tolerance on the per-user energy budget.
inline constexpr double kBudgetTolerance = 1e-9;

/// Per-antenna variance of the MMSE channel estimate,
/// gamma = tau_p p_p beta^2 / (1 + tau_p p_p beta).
template <typename Scalar>
Scalar mmse_estimate_variance(Scalar pilot_power, Scalar beta, int pilot_length) {
  if (pilot_power < Scalar(0)) throw std::domain_error("pilot power must be nonnegative");
  if (!(beta > Scalar(0))) throw std::domain_error("beta must be positive");
  if (pilot_length < 1) throw std::domain_error("pilot length must be >= 1");
  const Scalar snr = Scalar(pilot_length) * pilot_power * beta;
  return snr * beta / (Scalar(1) + snr);
}

namespace detail {

template <typename Scalar>
void check_dimensions(const PowerAllocationT<Scalar>& alloc,
                      const LargeScaleFadingT<Scalar>& fading, const SystemConfig& cfg) {
  if (fading.size() != cfg.users)
    throw std::invalid_argument("fading: dimension does not match K");
  alloc.validate(cfg);
}

// SINR of user k given the received payload power sum_j beta_j p_u^j. The
// interference sum is accumulated directly rather than by subtraction.
template <typename Scalar>
Scalar sinr_from_total(const PowerAllocationT<Scalar>& alloc,
                       const LargeScaleFadingT<Scalar>& fading, const SystemConfig& cfg,
                       Eigen::Index k, Scalar received_total) {
  const Scalar tau = Scalar(cfg.pilot_length);
  const Scalar bk = fading.beta(k);
  const Scalar ppk = alloc.pilot(k);
  Scalar others(0);
  for (Eigen::Index j = 0; j < fading.size(); ++j)
    if (j != k) others += fading.beta(j) * alloc.payload(j);
  const Scalar num = Scalar(cfg.antennas - 1) * alloc.payload(k) * ppk * bk * bk * tau;
  const Scalar den = Scalar(1) + received_total + tau * bk * ppk + tau * ppk * bk * others;
  return num / den;
}

}  // namespace detail

/// Effective SINR of user k (0-based) under MRC with MMSE estimates:
///
///   (M-1) p_u^k p_p^k beta_k^2 tau_p
///   ----------------------------------------------------------------------
///   1 + sum_j beta_j p_u^j + tau_p beta_k p_p^k + tau_p p_p^k beta_k sum_{j!=k} beta_j p_u^j
template <typename Scalar>
Scalar sinr(const PowerAllocationT<Scalar>& alloc, const LargeScaleFadingT<Scalar>& fading,
            const SystemConfig& cfg, Eigen::Index k) {
  detail::check_dimensions(alloc, fading, cfg);
  if (k < 0 || k >= cfg.users) throw std::out_of_range("sinr: user index out of range");
  const Scalar total = fading.beta.dot(alloc.payload);
  return detail::sinr_from_total(alloc, fading, cfg, k, total);
}

/// All K SINRs at once.
template <typename Scalar>
Vec<Scalar> sinr_all(const PowerAllocationT<Scalar>& alloc,
                     const LargeScaleFadingT<Scalar>& fading, const SystemConfig& cfg) {
  detail::check_dimensions(alloc, fading, cfg);
  const Scalar total = fading.beta.dot(alloc.payload);
  Vec<Scalar> out(cfg.users);
  for (Eigen::Index k = 0; k < cfg.users; ++k)
    out(k) = detail::sinr_from_total(alloc, fading, cfg, k, total);
  return out;
}

template <typename Scalar>
struct SeReportT {
  Vec<Scalar> sinr;  // linear
  Vec<Scalar> se;    // bit/s/Hz
  Scalar sum_se{};
  Scalar min_se{};
};
using SeReport = SeReportT<double>;

/// SE_k = (1 - tau_p/T) log2(1 + SINR_k), with sum and minimum.
template <typename Scalar>
SeReportT<Scalar> se_report(const PowerAllocationT<Scalar>& alloc,
                            const LargeScaleFadingT<Scalar>& fading, const SystemConfig& cfg) {
  SeReportT<Scalar> r;
  r.sinr = sinr_all(alloc, fading, cfg);
  const Scalar prelog = Scalar(cfg.prelog());
  r.se = r.sinr.unaryExpr([&](Scalar s) { return prelog * std::log2(Scalar(1) + s); });
  r.sum_se = r.se.sum();
  r.min_se = r.se.minCoeff();
  return r;
}

/// p_p^k = p_u^k = E_max / T for every user; spends the budget exactly.
inline PowerAllocation equal_power_allocation(const SystemConfig& cfg) {
  cfg.validate();
  const double p = cfg.energy_budget / cfg.coherence;
  return {Eigen::VectorXd::Constant(cfg.users, p), Eigen::VectorXd::Constant(cfg.users, p)};
}

/// Energy left unused per user, E_max - tau_p p_p^k - (T - tau_p) p_u^k.
template <typename Scalar>
Vec<Scalar> energy_slack(const PowerAllocationT<Scalar>& alloc, const SystemConfig& cfg) {
  alloc.validate(cfg);
  const Scalar tau = Scalar(cfg.pilot_length);
  const Scalar data = Scalar(cfg.coherence - cfg.pilot_length);
  return (Scalar(cfg.energy_budget) - (tau * alloc.pilot + data * alloc.payload).array())
      .matrix();
}

template <typename Scalar>
bool within_budget(const PowerAllocationT<Scalar>& alloc, const SystemConfig& cfg,
                   double rel_tol = kBudgetTolerance) {
  return (energy_slack(alloc, cfg).array() >= Scalar(-rel_tol * cfg.energy_budget)).all();
}

// ---------------------------------------------------------------------------
// Scale normalization. The SINR depends on beta and the powers only through
// the products beta_j p^j, so (beta, p, E_max) -> (c beta, p / c, E_max / c)
// leaves every SINR unchanged. Optimizers work with max_k beta_k = 1.

struct Normalization {
  double scale = 1.0;  // c: normalized beta = c * beta

  LargeScaleFading apply(const LargeScaleFading& f) const {
    return LargeScaleFading(f.beta * scale);
  }
  SystemConfig apply(const SystemConfig& cfg) const {
    SystemConfig c = cfg;
    c.energy_budget = cfg.energy_budget / scale;
    return c;
  }
  /// Normalized-unit powers back to caller units.
  PowerAllocation restore(const PowerAllocation& a) const {
    return {a.pilot * scale, a.payload * scale};
  }
  PowerAllocation apply(const PowerAllocation& a) const {
    return {a.pilot / scale, a.payload / scale};
  }
};

inline Normalization unit_peak_normalization(const LargeScaleFading& f) {
  return Normalization{1.0 / f.beta.maxCoeff()};
}

}  // namespace mmpc
