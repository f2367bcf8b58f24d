#include <doctest.h>

#include <cmath>
#include <random>

#include "mmpc/oracle.hpp"
#include "mmpc/sim.hpp"
#include "mmpc/sumse.hpp"

using namespace mmpc;

namespace {

SystemConfig config(int M, int K, int T, double emax) {
  SystemConfig c;
  c.antennas = M;
  c.users = K;
  c.coherence = T;
  c.pilot_length = K;
  c.energy_budget = emax;
  return c;
}

LargeScaleFading cell_drop(std::mt19937_64& rng, int K) {
  return drop_users(rng, DropConfig{}, K).fading;
}

PowerAllocation random_feasible(std::mt19937_64& rng, const SystemConfig& cfg, Mode mode) {
  std::uniform_real_distribution<double> u(0.02, 0.98);
  Eigen::VectorXd rho(cfg.users);
  for (int k = 0; k < cfg.users; ++k) rho(k) = u(rng);
  PowerAllocation a = oracle::allocation_from_fractions(rho, cfg);
  if (mode == Mode::DataOnly) {
    a = equal_power_allocation(cfg);
    for (int k = 0; k < cfg.users; ++k) a.payload(k) *= u(rng);
  }
  return a;
}

// Unpacks a subproblem point: powers, then lambdas.
PowerAllocation powers_of(const Eigen::VectorXd& x, const SystemConfig& cfg, Mode mode) {
  const int K = cfg.users;
  if (mode == Mode::Joint) return {x.head(K), x.segment(K, K)};
  return {Eigen::VectorXd::Constant(K, cfg.energy_budget / cfg.coherence), x.head(K)};
}

}  // namespace

TEST_CASE("subproblem is tight at the expansion point") {
  std::mt19937_64 rng(3);
  const auto cfg = config(100, 5, 200, 20);
  for (Mode mode : {Mode::Joint, Mode::DataOnly}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto f = cell_drop(rng, 5);
      const PowerAllocation prev = random_feasible(rng, cfg, mode);
      const gp::GpProblem prob = build_sca_subproblem(f, cfg, mode, prev);
      const Eigen::Index np = mode == Mode::Joint ? 10 : 5;
      Eigen::VectorXd x(prob.num_variables());
      x.head(np) = mode == Mode::Joint
                       ? Eigen::VectorXd((Eigen::VectorXd(10) << prev.pilot, prev.payload).finished())
                       : prev.payload;
      const Eigen::VectorXd sinr = sinr_all(prev, f, cfg);
      x.tail(5) = (sinr.array() + 1.0).matrix();
      for (int k = 0; k < 5; ++k) {
        // lambda_k = 1 + SINR_k puts the approximated constraint exactly on 1.
        const double v = gp::evaluate(prob.constraints()[static_cast<std::size_t>(k)], x);
        CHECK(std::abs(v - 1.0) <= 1e-12);
      }
      for (const auto& c : prob.standard_constraints()) CHECK(gp::evaluate(c, x) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("subproblem feasible points are feasible for the true problem") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto cfg = config(100, 4, 200, 20);
  for (Mode mode : {Mode::Joint, Mode::DataOnly}) {
    const auto f = cell_drop(rng, 4);
    const gp::GpProblem prob = build_sca_subproblem(f, cfg, mode, random_feasible(rng, cfg, mode));
    const auto cons = prob.standard_constraints();
    int accepted = 0;
    while (accepted < 1000) {
      PowerAllocation a = random_feasible(rng, cfg, mode);
      const Eigen::VectorXd sinr = sinr_all(a, f, cfg);
      Eigen::VectorXd x(prob.num_variables());
      const Eigen::Index np = prob.num_variables() - 4;
      x.head(np) = mode == Mode::Joint
                       ? Eigen::VectorXd((Eigen::VectorXd(8) << a.pilot, a.payload).finished())
                       : a.payload;
      // lambda anywhere between 1 and a little past the true 1 + SINR.
      for (int k = 0; k < 4; ++k) x(np + k) = 1.0 + (1.2 * u(rng)) * sinr(k);
      bool feasible = true;
      for (const auto& c : cons) feasible = feasible && gp::evaluate(c, x) <= 1.0;
      if (!feasible) continue;
      ++accepted;
      const auto p = powers_of(x, cfg, mode);
      const Eigen::VectorXd s = sinr_all(p, f, cfg);
      for (int k = 0; k < 4; ++k) CHECK(x(np + k) <= (1.0 + s(k)) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("single user: sum SE and max-min coincide") {
  const auto cfg = config(20, 1, 40, 4);
  const LargeScaleFading f(Eigen::VectorXd::Constant(1, 0.3));
  const SumSeSolution s = sca_solve(f, cfg, Mode::Joint);
  const MaxMinSolution m = solve_maxmin(f, cfg, Mode::Joint);
  CHECK(s.status == ScaStatus::Converged);
  CHECK(s.sca_iterations <= 2);
  REQUIRE(s.objective_trace.size() >= 2);
  CHECK(std::abs(s.objective_trace.back() - s.objective_trace[s.objective_trace.size() - 2]) < 1e-9);
  CHECK(s.report.sum_se == doctest::Approx(m.report.min_se).epsilon(1e-9));
}

TEST_CASE("SCA run contract on campaign-sized drops") {
  std::mt19937_64 rng(7);
  const auto cfg = config(100, 10, 200, 20);
  for (int trial = 0; trial < 8; ++trial) {
    const auto f = cell_drop(rng, 10);
    const double equal = se_report(equal_power_allocation(cfg), f, cfg).sum_se;
    const SumSeSolution data = sca_solve(f, cfg, Mode::DataOnly, {}, {equal_power_allocation(cfg)});
    const SumSeSolution joint = sca_solve(f, cfg, Mode::Joint, {}, {data.alloc});
    for (const SumSeSolution* s : {&data, &joint}) {
      CHECK(s->status == ScaStatus::Converged);
      CHECK(s->started_from_maxmin);
      CHECK(s->stationarity <= 1e-5);
      CHECK((s->lambdas.array() >= 1.0).all());
      CHECK(within_budget(s->alloc, cfg));
      for (std::size_t i = 1; i < s->objective_trace.size(); ++i)
        CHECK(s->objective_trace[i] >= s->objective_trace[i - 1] - 1e-9);
      const auto& t = s->objective_trace;
      CHECK(std::abs(t.back() - t[t.size() - 2]) / t.back() <= 1e-6);
      CHECK(s->report.sum_se == doctest::Approx(t.back()).epsilon(1e-14));
    }
    CHECK(energy_slack(joint.alloc, cfg).cwiseAbs().maxCoeff() <= 1e-6 * cfg.energy_budget);
    CHECK(joint.report.sum_se >= data.report.sum_se - 1e-6);
    CHECK(data.report.sum_se >= equal - 1e-6);
  }
}

TEST_CASE("two users against the grid") {
  std::mt19937_64 rng(11);
  int close = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto cfg = config(20, 2, 40, compute_emax(DropConfig{}, 40));
    const auto f = cell_drop(rng, 2);
    const SumSeSolution s = sca_solve(f, cfg, Mode::Joint);
    const auto g = oracle::grid_search(f, cfg, Utility::Sum);
    close += s.report.sum_se >= 0.99 * g.utility;
  }
  CHECK(close >= 45);
}

TEST_CASE("stationarity detects a non-stationary point") {
  std::mt19937_64 rng(13);
  const auto cfg = config(100, 4, 200, 20);
  const auto f = cell_drop(rng, 4);
  CHECK(sum_se_stationarity(f, cfg, Mode::Joint, equal_power_allocation(cfg)) > 1e-3);
  const SumSeSolution s = sca_solve(f, cfg, Mode::Joint);
  CHECK(sum_se_stationarity(f, cfg, Mode::Joint, s.alloc) <= 1e-5);
}
