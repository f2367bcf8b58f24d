#include "formulation.hpp"

#include <algorithm>

namespace mmpc::detail {

PowerVariables make_layout(const SystemConfig& cfg, Mode mode) {
  PowerVariables v;
  v.mode = mode;
  v.users = cfg.users;
  v.fixed_pilot = cfg.energy_budget / cfg.coherence;
  return v;
}

PowerAllocation PowerVariables::extract(const Eigen::VectorXd& x) const {
  PowerAllocation a{Eigen::VectorXd(users), Eigen::VectorXd(users)};
  for (Eigen::Index k = 0; k < users; ++k) {
    a.pilot(k) = mode == Mode::Joint ? x(pilot(k)) : fixed_pilot;
    a.payload(k) = x(payload(k));
  }
  return a;
}

Eigen::VectorXd PowerVariables::pack(const PowerAllocation& alloc) const {
  Eigen::VectorXd x(num_powers());
  for (Eigen::Index k = 0; k < users; ++k) {
    if (mode == Mode::Joint) x(pilot(k)) = alloc.pilot(k);
    x(payload(k)) = alloc.payload(k);
  }
  return x;
}

gp::Monomial sinr_numerator(const PowerVariables& vars, const LargeScaleFading& fading,
                            const SystemConfig& cfg, Eigen::Index k) {
  const double b = fading.beta(k);
  const double c = (cfg.antennas - 1) * static_cast<double>(cfg.pilot_length) * b * b;
  return c * vars.pilot_power(k) * vars.payload_power(k);
}

gp::Posynomial sinr_denominator(const PowerVariables& vars, const LargeScaleFading& fading,
                                const SystemConfig& cfg, Eigen::Index k) {
  const double tau = cfg.pilot_length;
  const double bk = fading.beta(k);
  gp::Posynomial d(gp::Monomial(1.0));
  for (Eigen::Index j = 0; j < vars.users; ++j) d += fading.beta(j) * vars.payload_power(j);
  const gp::Monomial pilot_gain = tau * bk * vars.pilot_power(k);
  d += pilot_gain;
  for (Eigen::Index j = 0; j < vars.users; ++j)
    if (j != k) d += pilot_gain * (fading.beta(j) * vars.payload_power(j));
  return d;
}

gp::Posynomial budget_constraint(const PowerVariables& vars, const SystemConfig& cfg,
                                 Eigen::Index k) {
  const double tau = cfg.pilot_length;
  const double data = cfg.coherence - cfg.pilot_length;
  const double e = cfg.energy_budget;
  if (vars.mode == Mode::Joint) {
    gp::Posynomial p((tau / e) * vars.pilot_power(k));
    p += (data / e) * vars.payload_power(k);
    return p;
  }
  return (data / (e - tau * vars.fixed_pilot)) * vars.payload_power(k);
}

double power_floor(const SystemConfig& cfg) {
  return 1e-9 * cfg.energy_budget / cfg.coherence;
}

PowerAllocation settle_budget(PowerAllocation alloc, const SystemConfig& cfg, Mode mode) {
  const double tau = cfg.pilot_length;
  const double data = cfg.coherence - cfg.pilot_length;
  const double e = cfg.energy_budget;
  for (Eigen::Index k = 0; k < alloc.pilot.size(); ++k) {
    if (mode == Mode::Joint) {
      alloc.payload(k) = std::min(alloc.payload(k), e / data);
      alloc.pilot(k) = std::max(0.0, (e - data * alloc.payload(k)) / tau);
    } else {
      alloc.payload(k) = std::min(alloc.payload(k), (e - tau * alloc.pilot(k)) / data);
    }
  }
  return alloc;
}

PowerAllocation restore_allocation(const Normalization& norm, const PowerAllocation& alloc,
                                   const SystemConfig& cfg, Mode mode) {
  PowerAllocation out = norm.restore(alloc);
  if (mode == Mode::DataOnly) out.pilot.setConstant(cfg.energy_budget / cfg.coherence);
  return settle_budget(std::move(out), cfg, mode);
}

}  // namespace mmpc::detail
