#pragma once

// Max-min SE power control as a single geometric program, plus the sweep
// over training lengths.

#include "mmpc/gp.hpp"
#include "mmpc/model.hpp"

#include <vector>

namespace mmpc {

/// Joint optimizes pilot and payload powers. DataOnly pins every pilot power
/// to E_max/T and optimizes payload powers only.
enum class Mode { Joint, DataOnly };
enum class Utility { MaxMin, Sum };

const char* to_string(Mode m);
const char* to_string(Utility u);

/// Epigraph form in the caller's units:
///   minimize 1/lambda
///   s.t. lambda D_k / N_k <= 1,  (tau_p p_p^k + (T - tau_p) p_u^k) / E_max <= 1.
/// Variables are p_p (Joint only), p_u, then lambda. Every power carries a
/// small positive lower bound so the log-space problem stays bounded.
gp::GpProblem build_maxmin_gp(const LargeScaleFading& fading, const SystemConfig& cfg,
                              Mode mode);

struct MaxMinSolution {
  PowerAllocation alloc;
  double lambda = 0.0;  // min_k SINR_k of alloc
  SeReport report;
  gp::GpStatus status = gp::GpStatus::MaxIterations;
  int gp_iterations = 0;
  double kkt_residual = 0.0;
};

/// Solves in normalized units (max beta = 1) and returns powers in the
/// caller's units. In Joint mode leftover budget is spent on pilot power,
/// which can only raise the owner's SINR.
MaxMinSolution solve_maxmin(const LargeScaleFading& fading, const SystemConfig& cfg, Mode mode,
                            const gp::SolverOptions& options = {});

struct TauPoint {
  int pilot_length = 0;
  double utility = 0.0;  // min SE or sum SE, bit/s/Hz
  bool solved = false;
};

/// Re-solves for every tau_p in {K, ..., min(T - 1, K + max_extra)}.
/// `cfg.pilot_length` is ignored.
std::vector<TauPoint> sweep_tau(const LargeScaleFading& fading, const SystemConfig& cfg,
                                Mode mode, Utility utility, int max_extra,
                                const gp::SolverOptions& options = {});

}  // namespace mmpc
