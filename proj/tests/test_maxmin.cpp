#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mmpc/maxmin.hpp"
#include "mmpc/oracle.hpp"
#include "mmpc/sim.hpp"

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

double sinr_spread(const SeReport& r) {
  return (r.sinr.maxCoeff() - r.sinr.minCoeff()) / r.sinr.minCoeff();
}

}  // namespace

TEST_CASE("max-min GP structure") {
  const auto one = build_maxmin_gp(LargeScaleFading(Eigen::VectorXd::Ones(1)),
                                   config(10, 1, 20, 2), Mode::Joint);
  CHECK(one.constraints().size() == 2);
  CHECK(one.num_variables() == 3);

  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(10, 0.1, 1.0);
  const auto joint = build_maxmin_gp(LargeScaleFading(b), config(100, 10, 200, 20), Mode::Joint);
  CHECK(joint.num_variables() == 21);
  CHECK(joint.constraints().size() == 20);
  CHECK(joint.num_bound_constraints() == 20);

  const auto data = build_maxmin_gp(LargeScaleFading(b), config(100, 10, 200, 20), Mode::DataOnly);
  CHECK(data.num_variables() == 11);
  CHECK(data.constraints().size() == 20);
}

TEST_CASE("single user: every pilot split is scanned") {
  const auto cfg = config(20, 1, 40, 4);
  const LargeScaleFading f(Eigen::VectorXd::Constant(1, 1.0));
  const MaxMinSolution s = solve_maxmin(f, cfg, Mode::Joint);
  REQUIRE(s.status == gp::GpStatus::Optimal);
  oracle::GridSpec fine;
  fine.points = 20000;
  const auto g = oracle::grid_search(f, cfg, Utility::MaxMin, fine);
  CHECK(s.report.min_se >= g.utility * (1.0 - 1e-9));
  CHECK(s.report.min_se <= g.utility * (1.0 + 1e-6));
  CHECK(std::abs(energy_slack(s.alloc, cfg)(0)) <= 1e-6 * cfg.energy_budget);
}

TEST_CASE("symmetric users share one pilot fraction") {
  // With equal beta the optimum is symmetric, so a 1-D scan over a common
  // pilot fraction is exact.
  for (int K : {2, 4}) {
    const auto cfg = config(50, K, 60, 6);
    const LargeScaleFading f(Eigen::VectorXd::Constant(K, 0.7));
    const MaxMinSolution s = solve_maxmin(f, cfg, Mode::Joint);
    REQUIRE(s.status == gp::GpStatus::Optimal);
    double best = 0.0;
    for (double rho : oracle::pilot_fraction_grid({20000, 1e-4, 1 - 1e-4})) {
      const auto a = oracle::allocation_from_fractions(Eigen::VectorXd::Constant(K, rho), cfg);
      best = std::max(best, se_report(a, f, cfg).min_se);
    }
    CHECK(s.report.min_se >= best * (1.0 - 1e-9));
    CHECK(s.report.min_se <= best * (1.0 + 1e-6));
    CHECK((s.alloc.pilot.array() - s.alloc.pilot(0)).abs().maxCoeff() <= 1e-6 * s.alloc.pilot(0));
  }
}

TEST_CASE("two users against the 400x400 grid") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto cfg = config(trial % 2 ? 100 : 20, 2, 40, compute_emax(DropConfig{}, 40));
    const auto f = cell_drop(rng, 2);
    const MaxMinSolution s = solve_maxmin(f, cfg, Mode::Joint);
    REQUIRE(s.status == gp::GpStatus::Optimal);
    const auto g = oracle::grid_search(f, cfg, Utility::MaxMin);
    CHECK(s.lambda >= g.min_sinr * (1.0 - 1e-7));
    CHECK(s.lambda <= g.min_sinr * 1.01);
  }
}

TEST_CASE("optimum equalizes SINRs and spends the joint budget") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 2 + trial % 9;
    const auto cfg = config(100, K, 200, 20);
    const auto f = cell_drop(rng, K);
    for (Mode mode : {Mode::Joint, Mode::DataOnly}) {
      const MaxMinSolution s = solve_maxmin(f, cfg, mode);
      REQUIRE(s.status == gp::GpStatus::Optimal);
      CHECK(sinr_spread(s.report) <= 1e-4);
      CHECK(s.kkt_residual <= 1e-8);
      CHECK(within_budget(s.alloc, cfg));
      if (mode == Mode::Joint)
        CHECK(energy_slack(s.alloc, cfg).cwiseAbs().maxCoeff() <= 1e-6 * cfg.energy_budget);
      else
        CHECK((s.alloc.pilot.array() == cfg.energy_budget / cfg.coherence).all());
    }
  }
}

TEST_CASE("mode dominance") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cfg = config(100, 10, 200, 20);
    const auto f = cell_drop(rng, 10);
    const double joint = solve_maxmin(f, cfg, Mode::Joint).lambda;
    const double data = solve_maxmin(f, cfg, Mode::DataOnly).lambda;
    const double equal = sinr_all(equal_power_allocation(cfg), f, cfg).minCoeff();
    CHECK(joint >= data * (1.0 - 1e-7));
    CHECK(data >= equal * (1.0 - 1e-7));
  }
}

TEST_CASE("permuting users permutes the allocation") {
  std::mt19937_64 rng(31);
  const auto cfg = config(64, 6, 100, 10);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = cell_drop(rng, 6);
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::VectorXd pb(6);
    for (int k = 0; k < 6; ++k) pb(k) = f.beta(perm[static_cast<std::size_t>(k)]);
    const auto a = solve_maxmin(f, cfg, Mode::Joint);
    const auto b = solve_maxmin(LargeScaleFading(pb), cfg, Mode::Joint);
    CHECK(b.lambda == doctest::Approx(a.lambda).epsilon(1e-6));
    for (int k = 0; k < 6; ++k) {
      const auto src = perm[static_cast<std::size_t>(k)];
      CHECK(b.alloc.payload(k) == doctest::Approx(a.alloc.payload(src)).epsilon(1e-4));
      CHECK(b.alloc.pilot(k) == doctest::Approx(a.alloc.pilot(src)).epsilon(1e-4));
    }
  }
}

TEST_CASE("raw path-loss units give the same SINRs as normalized units") {
  std::mt19937_64 rng(37);
  const DropConfig dc;
  const auto f = cell_drop(rng, 5);
  const auto cfg = config(100, 5, 200, compute_emax(dc, 200));
  const double c = std::pow(dc.cell_radius, -dc.pathloss_exponent);
  auto raw = cfg;
  raw.energy_budget = compute_emax(dc, 200, false);
  const auto a = solve_maxmin(f, cfg, Mode::Joint);
  const auto b = solve_maxmin(LargeScaleFading(f.beta * c), raw, Mode::Joint);
  REQUIRE(b.status == gp::GpStatus::Optimal);
  CHECK(b.lambda == doctest::Approx(a.lambda).epsilon(1e-9));
  CHECK(b.alloc.payload(0) == doctest::Approx(a.alloc.payload(0) / c).epsilon(1e-9));
}

TEST_CASE("training length sweep peaks at K") {
  SUBCASE("single user, T = 4") {
    const auto cfg = config(10, 1, 4, 1);
    const LargeScaleFading f(Eigen::VectorXd::Ones(1));
    for (Utility u : {Utility::MaxMin, Utility::Sum}) {
      const auto pts = sweep_tau(f, cfg, Mode::Joint, u, 10);
      REQUIRE(pts.size() == 3);
      CHECK(pts[0].pilot_length == 1);
      for (const auto& p : pts) CHECK(p.solved);
      CHECK(pts[0].utility >= pts[1].utility);
      CHECK(pts[0].utility >= pts[2].utility);
    }
  }
  SUBCASE("three users") {
    std::mt19937_64 rng(41);
    const auto cfg = config(30, 3, 30, compute_emax(DropConfig{}, 30));
    for (int trial = 0; trial < 3; ++trial) {
      const auto f = cell_drop(rng, 3);
      for (Utility u : {Utility::MaxMin, Utility::Sum}) {
        const auto pts = sweep_tau(f, cfg, Mode::Joint, u, 12);
        REQUIRE(pts.size() == 13);
        for (std::size_t i = 1; i < pts.size(); ++i)
          CHECK(pts[i].utility <= pts[i - 1].utility + 1e-9);
      }
    }
  }
}
