#include <doctest.h>

#include <cmath>
#include <random>

#include "mmpc/oracle.hpp"

using namespace mmpc;
using namespace mmpc::oracle;

TEST_CASE("pilot fraction grid") {
  const auto g = pilot_fraction_grid({11, 1e-4, 1 - 1e-4});
  REQUIRE(g.size() == 11);
  CHECK(g.front() == doctest::Approx(1e-4).epsilon(1e-9));
  CHECK(g.back() == doctest::Approx(1 - 1e-4).epsilon(1e-12));
  CHECK(g[5] == doctest::Approx(0.5).epsilon(1e-12));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  CHECK_THROWS(pilot_fraction_grid({9, 0.1, 0.9}));
  CHECK_THROWS(pilot_fraction_grid({10, 0.0, 0.9}));
  CHECK_THROWS(pilot_fraction_grid({10, 0.5, 0.4}));
}

TEST_CASE("fractions map onto the budget") {
  SystemConfig cfg;
  cfg.users = 2;
  cfg.pilot_length = 2;
  const auto a = allocation_from_fractions(Eigen::Vector2d(0.25, 0.9), cfg);
  CHECK(energy_slack(a, cfg).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(a.pilot(0) * cfg.pilot_length / cfg.energy_budget == doctest::Approx(0.25));
}

TEST_CASE("grid search") {
  SystemConfig cfg;
  cfg.antennas = 20;
  cfg.users = 2;
  cfg.coherence = 40;
  cfg.pilot_length = 2;
  cfg.energy_budget = 4;

  SUBCASE("symmetric users pick equal fractions") {
    const LargeScaleFading f(Eigen::Vector2d(0.5, 0.5));
    GridSpec spec;
    spec.points = 101;
    const auto r = grid_search(f, cfg, Utility::MaxMin, spec);
    const auto grid = pilot_fraction_grid(spec);
    const auto i0 = std::lower_bound(grid.begin(), grid.end(), r.rho(0)) - grid.begin();
    const auto i1 = std::lower_bound(grid.begin(), grid.end(), r.rho(1)) - grid.begin();
    CHECK(std::abs(i0 - i1) <= 1);
  }
  SUBCASE("refinement never loses") {
    const LargeScaleFading f(Eigen::Vector2d(1.0, 0.05));
    for (Utility u : {Utility::MaxMin, Utility::Sum}) {
      double prev = -1.0;
      // 2n - 1 points contain the n-point grid.
      for (int n : {11, 21, 41, 81, 161}) {
        const double v = grid_search(f, cfg, u, {n, 1e-4, 1 - 1e-4}).utility;
        CHECK(v >= prev);
        prev = v;
      }
    }
  }
  SUBCASE("too many users") {
    SystemConfig big = cfg;
    big.users = 4;
    big.pilot_length = 4;
    CHECK_THROWS(grid_search(LargeScaleFading(Eigen::VectorXd::Ones(4)), big, Utility::Sum));
  }
}

TEST_CASE("estimator moments") {
  SUBCASE("no pilot power") {
    const auto s = validate_estimator(8, 1.0, 0.0, 4, 100);
    CHECK(s.estimate_variance == 0.0);
    CHECK(s.target_variance == 0.0);
  }
  SUBCASE("half-quality estimate") {
    const auto s = validate_estimator(50, 1.0, 1.0, 1, 100000, 7);
    CHECK(s.target_variance == doctest::Approx(0.5));
    CHECK(std::abs(s.estimate_variance / 0.5 - 1.0) <= 0.02);
    CHECK(s.target_inverse_moment == doctest::Approx(1.0 / (49 * 0.5)));
    CHECK(std::abs(s.inverse_moment / s.target_inverse_moment - 1.0) <= 0.02);
    CHECK(s.correlation <= 5.0 / std::sqrt(100000.0 * 50));
  }
  SUBCASE("variance tracks the closed form") {
    for (double p : {0.1, 2.0, 30.0}) {
      const auto s = validate_estimator(16, 0.4, p, 3, 20000, 11);
      CHECK(std::abs(s.estimate_variance / mmse_estimate_variance(p, 0.4, 3) - 1.0) <= 0.03);
    }
  }
  SUBCASE("seeded runs repeat") {
    const auto a = validate_estimator(8, 1.0, 1.0, 2, 1000, 3);
    const auto b = validate_estimator(8, 1.0, 1.0, 2, 1000, 3);
    CHECK(a.inverse_moment == b.inverse_moment);
  }
}
