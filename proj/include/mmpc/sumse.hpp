#pragma once

// Sum-SE power control by successive convex approximation. Each iteration
// replaces the denominator-cleared form of 1 + SINR_k by its tangent monomial
// at the previous iterate, which gives a GP whose feasible set lies inside
// the true one.

#include "mmpc/gp.hpp"
#include "mmpc/maxmin.hpp"
#include "mmpc/model.hpp"

#include <optional>
#include <vector>

namespace mmpc {

/// Variables: p_p (Joint only), p_u, then lambda_0..lambda_{K-1}.
///   minimize prod_k lambda_k^{-1}
///   s.t. lambda_k D_k / g~_k <= 1, budget as in max-min, lambda_k >= 1,
/// with g_k = D_k + N_k and g~_k its tangent monomial at `previous`.
/// `previous` must be strictly positive; DataOnly mode reads only its payload.
gp::GpProblem build_sca_subproblem(const LargeScaleFading& fading, const SystemConfig& cfg,
                                   Mode mode, const PowerAllocation& previous);

enum class ScaStatus { Converged, MaxIterations, SubproblemFailed };
const char* to_string(ScaStatus s);

struct ScaOptions {
  int max_iterations = 50;
  double tolerance = 1e-6;  // relative change of the sum SE
  /// Convergence also requires sum_se_stationarity at or below this value.
  double stationarity_target = 1e-5;
  gp::SolverOptions gp;
};

struct SumSeSolution {
  PowerAllocation alloc;
  Eigen::VectorXd lambdas;  // 1 + SINR_k of alloc
  SeReport report;
  ScaStatus status = ScaStatus::MaxIterations;
  int sca_iterations = 0;
  int newton_steps = 0;
  /// Sum SE of the starting point followed by every accepted iterate.
  std::vector<double> objective_trace;
  double stationarity = 0.0;  // see sum_se_stationarity
  /// False when the max-min initializer failed and equal power was used.
  bool started_from_maxmin = true;
};

/// Runs from the max-min solution of the same mode (equal power if that
/// solve fails), then from each entry of `extra_starts` whose sum SE the
/// current best does not reach, and returns the run with the largest sum SE.
/// The result therefore never falls below any extra start. Extra starts must
/// be feasible for `mode`.
SumSeSolution sca_solve(const LargeScaleFading& fading, const SystemConfig& cfg, Mode mode,
                        const ScaOptions& options = {},
                        const std::vector<PowerAllocation>& extra_starts = {});

/// Single SCA run from a given feasible allocation (caller's units).
SumSeSolution sca_solve_from(const LargeScaleFading& fading, const SystemConfig& cfg, Mode mode,
                             const PowerAllocation& start, const ScaOptions& options = {});

/// First-order optimality residual of the true sum-SE problem at `alloc`.
/// The problem is taken in log variables (powers and lambda_k = 1 + SINR_k),
/// minimizing -sum_k log lambda_k. Multipliers are fitted by NNLS over the
/// active constraints and the inf-norm of the Lagrangian gradient is returned.
double sum_se_stationarity(const LargeScaleFading& fading, const SystemConfig& cfg, Mode mode,
                           const PowerAllocation& alloc);

}  // namespace mmpc
