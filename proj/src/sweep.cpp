#include "mmpc/maxmin.hpp"
#include "mmpc/sumse.hpp"

#include <algorithm>

namespace mmpc {

std::vector<TauPoint> sweep_tau(const LargeScaleFading& fading, const SystemConfig& cfg,
                                Mode mode, Utility utility, int max_extra,
                                const gp::SolverOptions& options) {
  std::vector<TauPoint> out;
  const int last = std::min(cfg.coherence - 1, cfg.users + std::max(0, max_extra));
  for (int tau = cfg.users; tau <= last; ++tau) {
    SystemConfig c = cfg;
    c.pilot_length = tau;
    TauPoint pt;
    pt.pilot_length = tau;
    if (utility == Utility::MaxMin) {
      const MaxMinSolution s = solve_maxmin(fading, c, mode, options);
      pt.solved = s.status == gp::GpStatus::Optimal;
      pt.utility = s.report.min_se;
    } else {
      ScaOptions o;
      o.gp = options;
      const SumSeSolution s = sca_solve(fading, c, mode, o);
      pt.solved = s.status != ScaStatus::SubproblemFailed;
      pt.utility = s.report.sum_se;
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace mmpc
