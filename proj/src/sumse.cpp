#include "mmpc/sumse.hpp"

#include "formulation.hpp"
#include "mmpc/kkt.hpp"

#include <algorithm>
#include <cmath>

namespace mmpc {

namespace {

// Log-space slack below which a constraint enters the stationarity fit.
constexpr double kActiveSlack = 1e-6;

double sum_se_of(const PowerAllocation& a, const LargeScaleFading& f, const SystemConfig& cfg) {
  return se_report(a, f, cfg).sum_se;
}

// Nudges powers strictly inside the budget and above the floor so the
// subproblem can start from an interior point.
Eigen::VectorXd interior_start(const gp::GpProblem& prob, const detail::PowerVariables& vars,
                               const LargeScaleFading& f, const SystemConfig& cfg,
                               const PowerAllocation& prev) {
  const double floor = detail::power_floor(cfg);
  Eigen::VectorXd x(prob.num_variables());
  Eigen::VectorXd powers = vars.pack(prev) * (1.0 - 1e-7);
  powers = powers.cwiseMax(floor * (1.0 + 1e-6));
  x.head(vars.num_powers()) = powers;
  for (Eigen::Index k = 0; k < vars.users; ++k) {
    const gp::Posynomial d = detail::sinr_denominator(vars, f, cfg, k);
    gp::Posynomial g = d;
    g += detail::sinr_numerator(vars, f, cfg, k);
    const double ratio = gp::evaluate(gp::monomial_approximation(g, vars.pack(prev)), powers) /
                         gp::evaluate(d, powers);
    x(vars.num_powers() + k) = std::sqrt(std::max(ratio, 1.0));
  }
  return x;
}

}  // namespace

const char* to_string(ScaStatus s) {
  switch (s) {
    case ScaStatus::Converged: return "converged";
    case ScaStatus::MaxIterations: return "max-iterations";
    case ScaStatus::SubproblemFailed: return "subproblem-failed";
  }
  return "unknown";
}

gp::GpProblem build_sca_subproblem(const LargeScaleFading& fading, const SystemConfig& cfg,
                                   Mode mode, const PowerAllocation& previous) {
  cfg.validate();
  fading.validate(cfg);
  previous.validate(cfg);
  const auto vars = detail::make_layout(cfg, mode);
  const Eigen::VectorXd x_prev = vars.pack(previous);
  if (!(x_prev.array() > 0.0).all())
    throw std::invalid_argument("previous iterate must be strictly positive");
  const double floor = detail::power_floor(cfg);

  gp::GpProblem prob;
  for (Eigen::Index k = 0; mode == Mode::Joint && k < vars.users; ++k)
    prob.add_variable("p_p" + std::to_string(k), floor);
  for (Eigen::Index k = 0; k < vars.users; ++k)
    prob.add_variable("p_u" + std::to_string(k), floor);
  std::vector<gp::VarId> lambda;
  for (Eigen::Index k = 0; k < vars.users; ++k)
    lambda.push_back(prob.add_variable("lambda" + std::to_string(k), 1.0));

  gp::Monomial objective(1.0);
  for (gp::VarId v : lambda) objective *= gp::Monomial::variable(v, -1.0);
  prob.set_objective(objective);

  for (Eigen::Index k = 0; k < vars.users; ++k) {
    const gp::Posynomial d = detail::sinr_denominator(vars, fading, cfg, k);
    gp::Posynomial g = d;
    g += detail::sinr_numerator(vars, fading, cfg, k);
    const gp::Monomial g_tilde = gp::monomial_approximation(g, x_prev);
    prob.add_constraint(d * (gp::Monomial::variable(lambda[static_cast<std::size_t>(k)]) / g_tilde));
  }
  for (Eigen::Index k = 0; k < vars.users; ++k)
    prob.add_constraint(detail::budget_constraint(vars, cfg, k));
  return prob;
}

SumSeSolution sca_solve_from(const LargeScaleFading& fading, const SystemConfig& cfg, Mode mode,
                             const PowerAllocation& start, const ScaOptions& options) {
  cfg.validate();
  fading.validate(cfg);
  const Normalization norm = unit_peak_normalization(fading);
  const LargeScaleFading nf = norm.apply(fading);
  const SystemConfig ncfg = norm.apply(cfg);
  const auto vars = detail::make_layout(ncfg, mode);

  PowerAllocation x = detail::settle_budget(norm.apply(start), ncfg, mode);
  if (mode == Mode::DataOnly) x.pilot.setConstant(vars.fixed_pilot);
  x.payload = x.payload.cwiseMax(detail::power_floor(ncfg));
  if (mode == Mode::Joint) x.pilot = x.pilot.cwiseMax(detail::power_floor(ncfg));

  SumSeSolution out;
  double objective = sum_se_of(x, nf, ncfg);
  out.objective_trace.push_back(objective);
  out.status = ScaStatus::MaxIterations;

  for (int it = 0; it < options.max_iterations; ++it) {
    const gp::GpProblem prob = build_sca_subproblem(nf, ncfg, mode, x);
    const gp::GpSolution gs =
        gp::solve_gp(prob, options.gp, interior_start(prob, vars, nf, ncfg, x));
    out.newton_steps += gs.iterations + gs.phase1_iterations;
    ++out.sca_iterations;
    if (gs.status != gp::GpStatus::Optimal) {
      out.status = ScaStatus::SubproblemFailed;
      break;
    }
    const PowerAllocation candidate =
        detail::settle_budget(vars.extract(gs.x.head(vars.num_powers())), ncfg, mode);
    const double value = sum_se_of(candidate, nf, ncfg);
    // Each subproblem optimum is at least as good as the previous iterate, so
    // a decrease only reflects the solver tolerance: the iteration has stalled.
    if (value < objective) {
      out.status = ScaStatus::Converged;
      break;
    }
    x = candidate;
    const double change = (value - objective) / value;
    objective = value;
    out.objective_trace.push_back(objective);
    if (change <= options.tolerance &&
        sum_se_stationarity(nf, ncfg, mode, x) <= options.stationarity_target) {
      out.status = ScaStatus::Converged;
      break;
    }
  }

  out.alloc = detail::restore_allocation(norm, x, cfg, mode);
  out.report = se_report(out.alloc, fading, cfg);
  out.lambdas = (out.report.sinr.array() + 1.0).matrix();
  out.stationarity = sum_se_stationarity(nf, ncfg, mode, x);
  return out;
}

SumSeSolution sca_solve(const LargeScaleFading& fading, const SystemConfig& cfg, Mode mode,
                        const ScaOptions& options,
                        const std::vector<PowerAllocation>& extra_starts) {
  const MaxMinSolution mm = solve_maxmin(fading, cfg, mode, options.gp);
  const bool usable = mm.status == gp::GpStatus::Optimal && mm.lambda > 0.0;
  SumSeSolution best =
      sca_solve_from(fading, cfg, mode, usable ? mm.alloc : equal_power_allocation(cfg), options);
  best.started_from_maxmin = usable;
  for (const auto& s : extra_starts) {
    // SCA never ends below its starting value, so a start that the current
    // best already matches cannot win.
    if (best.report.sum_se >= se_report(s, fading, cfg).sum_se) continue;
    SumSeSolution cand = sca_solve_from(fading, cfg, mode, s, options);
    if (cand.report.sum_se > best.report.sum_se) {
      cand.started_from_maxmin = best.started_from_maxmin;
      best = std::move(cand);
    }
  }
  return best;
}

double sum_se_stationarity(const LargeScaleFading& fading, const SystemConfig& cfg, Mode mode,
                           const PowerAllocation& alloc) {
  const Normalization norm = unit_peak_normalization(fading);
  const LargeScaleFading nf = norm.apply(fading);
  const SystemConfig ncfg = norm.apply(cfg);
  const auto vars = detail::make_layout(ncfg, mode);
  const Eigen::VectorXd x = vars.pack(norm.apply(alloc));
  const Eigen::Index np = vars.num_powers();
  const Eigen::Index K = vars.users;
  const Eigen::Index n = np + K;
  const double floor = detail::power_floor(ncfg);

  // Rows: SINR constraints, budgets, power floors, lambda >= 1.
  const Eigen::Index m = 2 * K + np + K;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd values(m);
  Eigen::VectorXd obj_grad = Eigen::VectorXd::Zero(n);
  obj_grad.tail(K).setConstant(-1.0);

  Eigen::Index row = 0;
  Eigen::VectorXd lambda(K);
  for (Eigen::Index k = 0; k < K; ++k, ++row) {
    const gp::Posynomial d = detail::sinr_denominator(vars, nf, ncfg, k);
    gp::Posynomial g = d;
    g += detail::sinr_numerator(vars, nf, ncfg, k);
    const double dv = gp::evaluate(d, x);
    const double gv = gp::evaluate(g, x);
    lambda(k) = gv / dv;
    values(row) = 0.0;
    jac.row(row).head(np) = (x.array() * (gp::gradient(d, x).array() / dv -
                                          gp::gradient(g, x).array() / gv))
                                .matrix()
                                .transpose();
    jac(row, np + k) = 1.0;
  }
  for (Eigen::Index k = 0; k < K; ++k, ++row) {
    const gp::Posynomial b = detail::budget_constraint(vars, ncfg, k);
    const double bv = gp::evaluate(b, x);
    values(row) = std::log(bv);
    jac.row(row).head(np) = (x.array() * gp::gradient(b, x).array() / bv).matrix().transpose();
  }
  for (Eigen::Index i = 0; i < np; ++i, ++row) {
    values(row) = std::log(floor / x(i));
    jac(row, i) = -1.0;
  }
  for (Eigen::Index k = 0; k < K; ++k, ++row) {
    values(row) = -std::log(lambda(k));
    jac(row, np + k) = -1.0;
  }
  return kkt_stationarity<double>(obj_grad, jac, values, kActiveSlack).stationarity;
}

}  // namespace mmpc
