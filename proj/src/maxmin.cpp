#include "mmpc/maxmin.hpp"

#include "formulation.hpp"

namespace mmpc {

const char* to_string(Mode m) { return m == Mode::Joint ? "joint" : "data-only"; }
const char* to_string(Utility u) { return u == Utility::MaxMin ? "max-min" : "sum"; }

gp::GpProblem build_maxmin_gp(const LargeScaleFading& fading, const SystemConfig& cfg,
                              Mode mode) {
  cfg.validate();
  fading.validate(cfg);
  const auto vars = detail::make_layout(cfg, mode);
  const double floor = detail::power_floor(cfg);

  gp::GpProblem prob;
  for (Eigen::Index k = 0; mode == Mode::Joint && k < vars.users; ++k)
    prob.add_variable("p_p" + std::to_string(k), floor);
  for (Eigen::Index k = 0; k < vars.users; ++k)
    prob.add_variable("p_u" + std::to_string(k), floor);
  const gp::VarId lambda = prob.add_variable("lambda");

  prob.set_objective(gp::Monomial::variable(lambda, -1.0));
  for (Eigen::Index k = 0; k < vars.users; ++k) {
    const gp::Monomial scale =
        gp::Monomial::variable(lambda) / detail::sinr_numerator(vars, fading, cfg, k);
    prob.add_constraint(detail::sinr_denominator(vars, fading, cfg, k) * scale);
  }
  for (Eigen::Index k = 0; k < vars.users; ++k)
    prob.add_constraint(detail::budget_constraint(vars, cfg, k));
  return prob;
}

MaxMinSolution solve_maxmin(const LargeScaleFading& fading, const SystemConfig& cfg, Mode mode,
                            const gp::SolverOptions& options) {
  cfg.validate();
  fading.validate(cfg);
  const Normalization norm = unit_peak_normalization(fading);
  const LargeScaleFading nf = norm.apply(fading);
  const SystemConfig ncfg = norm.apply(cfg);
  const auto vars = detail::make_layout(ncfg, mode);

  const gp::GpProblem prob = build_maxmin_gp(nf, ncfg, mode);

  PowerAllocation start = equal_power_allocation(ncfg);
  start.payload *= 0.99;
  if (mode == Mode::Joint) start.pilot *= 0.99;
  Eigen::VectorXd x0(prob.num_variables());
  x0.head(vars.num_powers()) = vars.pack(start);
  x0(vars.num_powers()) = 0.9 * sinr_all(start, nf, ncfg).minCoeff();

  const gp::GpSolution gs = gp::solve_gp(prob, options, x0);

  MaxMinSolution out;
  out.status = gs.status;
  out.gp_iterations = gs.iterations + gs.phase1_iterations;
  out.kkt_residual = gs.kkt_residual;
  const PowerAllocation settled =
      detail::settle_budget(vars.extract(gs.x.head(vars.num_powers())), ncfg, mode);
  out.alloc = detail::restore_allocation(norm, settled, cfg, mode);
  out.report = se_report(out.alloc, fading, cfg);
  out.lambda = out.report.sinr.minCoeff();
  return out;
}

}  // namespace mmpc
