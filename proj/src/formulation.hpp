#pragma once

// Posynomial pieces of the SINR and budget expressions shared by the
// max-min GP and the sum-SE subproblems. Internal to the library.

#include "mmpc/gp.hpp"
#include "mmpc/maxmin.hpp"
#include "mmpc/model.hpp"

#include <vector>

namespace mmpc::detail {

/// Variable layout: pilot powers (Joint only), then payload powers, then the
/// epigraph variables.
struct PowerVariables {
  Mode mode = Mode::Joint;
  Eigen::Index users = 0;
  double fixed_pilot = 0.0;  // DataOnly pilot power

  Eigen::Index pilot(Eigen::Index k) const { return k; }
  Eigen::Index payload(Eigen::Index k) const {
    return mode == Mode::Joint ? users + k : k;
  }
  Eigen::Index num_powers() const { return mode == Mode::Joint ? 2 * users : users; }

  gp::Monomial pilot_power(Eigen::Index k) const {
    return mode == Mode::Joint ? gp::Monomial::variable(pilot(k)) : gp::Monomial(fixed_pilot);
  }
  gp::Monomial payload_power(Eigen::Index k) const { return gp::Monomial::variable(payload(k)); }

  PowerAllocation extract(const Eigen::VectorXd& x) const;
  /// Power coordinates of `alloc` in this layout.
  Eigen::VectorXd pack(const PowerAllocation& alloc) const;
};

PowerVariables make_layout(const SystemConfig& cfg, Mode mode);

/// (M-1) tau beta_k^2 p_p^k p_u^k
gp::Monomial sinr_numerator(const PowerVariables& vars, const LargeScaleFading& fading,
                            const SystemConfig& cfg, Eigen::Index k);
/// 1 + sum_j beta_j p_u^j + tau beta_k p_p^k + tau beta_k p_p^k sum_{j != k} beta_j p_u^j
gp::Posynomial sinr_denominator(const PowerVariables& vars, const LargeScaleFading& fading,
                                const SystemConfig& cfg, Eigen::Index k);
/// Energy use divided by E_max; in DataOnly mode the constant pilot energy
/// is moved to the right-hand side so the result is a monomial in p_u.
gp::Posynomial budget_constraint(const PowerVariables& vars, const SystemConfig& cfg,
                                 Eigen::Index k);
/// Positive floor placed on every power variable.
double power_floor(const SystemConfig& cfg);

/// Joint mode: raise each pilot power until the budget is met with equality.
/// DataOnly mode: clip payload powers onto the budget. Either way the result
/// is exactly feasible.
PowerAllocation settle_budget(PowerAllocation alloc, const SystemConfig& cfg, Mode mode);

/// Scales a normalized-unit allocation back to caller units and settles it
/// on the caller's budget, so DataOnly pilots are exactly E_max/T there.
PowerAllocation restore_allocation(const Normalization& norm, const PowerAllocation& alloc,
                                   const SystemConfig& cfg, Mode mode);

}  // namespace mmpc::detail
