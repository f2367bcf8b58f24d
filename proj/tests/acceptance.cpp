// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. An optional first argument overrides the
// campaign drop count (default 1000) for quick local runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mmpc/cli.hpp"
#include "mmpc/gp.hpp"
#include "mmpc/maxmin.hpp"
#include "mmpc/oracle.hpp"
#include "mmpc/sim.hpp"
#include "mmpc/sumse.hpp"

using namespace mmpc;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s | %s\n", pass ? "PASS" : "FAIL", id, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

void note(const std::string& line) {
  std::printf("    %s\n", line.c_str());
  std::fflush(stdout);
}

std::string num(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

double joint_slack(const PowerAllocation& a, const SystemConfig& cfg) {
  return energy_slack(a, cfg).cwiseAbs().maxCoeff() / cfg.energy_budget;
}

// Largest joint-mode budget slack seen across criteria 1, 2 and the campaign.
double worst_slack = 0.0;
int slack_outputs = 0;

void record_slack(const PowerAllocation& a, const SystemConfig& cfg) {
  worst_slack = std::max(worst_slack, joint_slack(a, cfg));
  ++slack_outputs;
}

DropConfig base_drops() { return DropConfig{}; }

void criterion_grid() {
  std::mt19937_64 rng(drop_seed(2024, 1));
  const DropConfig dc = base_drops();
  int good = 0;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    SystemConfig sys;
    sys.antennas = i % 2 ? 100 : 20;
    sys.users = 2;
    sys.coherence = 40;
    sys.pilot_length = 2;
    sys.energy_budget = compute_emax(dc, sys.coherence);
    const LargeScaleFading f = drop_users(rng, dc, 2).fading;
    const MaxMinSolution s = solve_maxmin(f, sys, Mode::Joint);
    const oracle::GridResult g = oracle::grid_search(f, sys, Utility::MaxMin);
    record_slack(s.alloc, sys);
    const double rel = s.lambda / g.min_sinr - 1.0;
    worst = std::max(worst, std::abs(rel));
    good += s.status == gp::GpStatus::Optimal && rel >= -1e-7 && rel <= 0.01;
  }
  report(1, good == 50, "max-min GP vs 400x400 grid, K=2, T=40, M in {20,100}",
         std::to_string(good) + "/50 within 1%, worst |GP/grid - 1| = " + num(worst));
}

void criterion_training_length() {
  std::mt19937_64 rng(drop_seed(2024, 2));
  const DropConfig dc = base_drops();
  int good = 0;
  for (int i = 0; i < 20; ++i) {
    const LargeScaleFading f = drop_users(rng, dc, 3).fading;
    bool ok = true;
    for (Utility u : {Utility::MaxMin, Utility::Sum}) {
      int best_tau = 0;
      double best = -1.0;
      for (int tau = 3; tau <= 15; ++tau) {
        SystemConfig sys;
        sys.antennas = 30;
        sys.users = 3;
        sys.coherence = 30;
        sys.pilot_length = tau;
        sys.energy_budget = compute_emax(dc, sys.coherence);
        double value = 0.0;
        if (u == Utility::MaxMin) {
          const MaxMinSolution s = solve_maxmin(f, sys, Mode::Joint);
          ok = ok && s.status == gp::GpStatus::Optimal;
          record_slack(s.alloc, sys);
          value = s.report.min_se;
        } else {
          const SumSeSolution s = sca_solve(f, sys, Mode::Joint);
          ok = ok && s.status != ScaStatus::SubproblemFailed;
          record_slack(s.alloc, sys);
          value = s.report.sum_se;
        }
        if (value > best) {
          best = value;
          best_tau = tau;
        }
      }
      ok = ok && best_tau == 3;
    }
    good += ok;
  }
  report(2, good == 20, "training length sweep tau_p = 3..15, K=3, M=30, T=30, both utilities",
         std::to_string(good) + "/20 peak at tau_p = 3");
}

gp::Posynomial random_posynomial(std::mt19937_64& rng, int vars) {
  std::uniform_int_distribution<int> terms(1, 6);
  std::uniform_real_distribution<double> coeff(0.05, 5.0), expo(-2.5, 2.5);
  std::vector<gp::Monomial> t;
  const int n = terms(rng);
  for (int j = 0; j < n; ++j) {
    gp::Monomial m(coeff(rng));
    for (int v = 0; v < vars; ++v) m *= gp::Monomial::variable(v, expo(rng));
    t.push_back(m);
  }
  return gp::Posynomial(std::move(t));
}

void criterion_tangent_monomial() {
  std::mt19937_64 rng(drop_seed(2024, 5));
  std::uniform_int_distribution<int> nvars(1, 5);
  std::uniform_real_distribution<double> logx(-1.5, 1.5);
  int good = 0;
  double worst_tan = 0.0, worst_grad = 0.0, worst_ratio = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int n = nvars(rng);
    const gp::Posynomial g = random_posynomial(rng, n);
    Eigen::VectorXd x0(n);
    for (int v = 0; v < n; ++v) x0(v) = std::exp(logx(rng));
    const gp::Monomial gt = gp::monomial_approximation(g, x0);

    const double tan = std::abs(gp::evaluate(gt, x0) / gp::evaluate(g, x0) - 1.0);
    worst_tan = std::max(worst_tan, tan);
    bool ok = tan <= 1e-12;

    const double scale = gp::gradient(g, x0).cwiseAbs().maxCoeff();
    for (int v = 0; v < n; ++v) {
      const double h = 1e-6 * x0(v);
      Eigen::VectorXd xp = x0, xm = x0;
      xp(v) += h;
      xm(v) -= h;
      const double fd_tilde = (gp::evaluate(gt, xp) - gp::evaluate(gt, xm)) / (2 * h);
      const double fd_true = (gp::evaluate(g, xp) - gp::evaluate(g, xm)) / (2 * h);
      const double err = std::abs(fd_tilde - fd_true) / std::max(scale, 1e-300);
      worst_grad = std::max(worst_grad, err);
      ok = ok && err <= 1e-5;
    }

    for (int s = 0; s < 10000; ++s) {
      Eigen::VectorXd x(n);
      for (int v = 0; v < n; ++v) x(v) = std::exp(3.0 * logx(rng));
      const double ratio = gp::evaluate(gt, x) / gp::evaluate(g, x) - 1.0;
      worst_ratio = std::max(worst_ratio, ratio);
      ok = ok && ratio <= 1e-12;
    }
    good += ok;
  }
  report(5, good == 200, "tangent monomial of 200 random posynomials",
         std::to_string(good) + "/200; tangency " + num(worst_tan) + ", gradient " +
             num(worst_grad) + ", max g~/g - 1 over 1e4 points " + num(worst_ratio));
}

void criterion_estimator() {
  // beta = p_p = tau_p = 1 gives gamma = 1 / (1 + 1) = 0.5.
  const auto s = oracle::validate_estimator(50, 1.0, 1.0, 1, 100000, 2024);
  const double ev = std::abs(s.estimate_variance / 0.5 - 1.0);
  const double ei = std::abs(s.inverse_moment * (49 * 0.5) - 1.0);
  report(6, ev <= 0.02 && ei <= 0.02, "MMSE estimate moments, M=50, gamma=0.5, 1e5 samples",
         "variance error " + num(ev) + ", E[1/||g_hat||^2] error " + num(ei));
}

CampaignConfig full_campaign(int drops) {
  CampaignConfig c;
  c.drops.num_drops = drops;
  c.drops.seed = 1;
  c.threads = 0;
  return c;
}

void criterion_sca(const CampaignResult& r) {
  int drops = 0, converged = 0, monotone = 0;
  double worst_step = 0.0, worst_stat = 0.0;
  for (Scheme s : {Scheme::SumDataOnly, Scheme::SumJoint}) {
    for (const auto& rec : r.scheme(s).records) {
      ++drops;
      converged += rec.converged && rec.iterations <= 50;
      bool mono = true;
      for (std::size_t i = 1; i < rec.objective_trace.size(); ++i) {
        const double step = rec.objective_trace[i] - rec.objective_trace[i - 1];
        worst_step = std::min(worst_step, step);
        mono = mono && step >= -1e-9;
      }
      monotone += mono;
      worst_stat = std::max(worst_stat, rec.stationarity);
    }
  }
  const bool pass = monotone == drops && converged >= 0.99 * drops && worst_stat <= 1e-5;
  report(4, pass, "SCA monotone, converged within 50 iterations, stationarity <= 1e-5",
         std::to_string(monotone) + "/" + std::to_string(drops) + " monotone (worst step " +
             num(worst_step) + "), " + std::to_string(converged) + " converged, max residual " +
             num(worst_stat));
}

void criterion_slack(const CampaignResult& r) {
  for (Scheme s : {Scheme::MaxMinJoint, Scheme::SumJoint})
    for (const auto& rec : r.scheme(s).records) record_slack(rec.alloc, r.system);
  report(3, worst_slack <= 1e-6, "budget spent by every joint optimizer output",
         std::to_string(slack_outputs) + " outputs, max |slack| / E_max = " + num(worst_slack));
}

bool band(const std::string& label, double value, double lo, double hi) {
  const bool ok = value >= lo && value <= hi;
  note(std::string(ok ? "ok   " : "out  ") + label + " = " + num(value) + " in [" + num(lo) +
       ", " + num(hi) + "]");
  return ok;
}

double fraction_above(const std::vector<double>& v, double threshold) {
  return static_cast<double>(std::count_if(v.begin(), v.end(),
                                           [&](double x) { return x > threshold; })) /
         static_cast<double>(v.size());
}

void criterion_campaign(const CampaignResult& r) {
  const auto& nc = r.scheme(Scheme::NoControl);
  const auto& mmd = r.scheme(Scheme::MaxMinDataOnly);
  const auto& mmj = r.scheme(Scheme::MaxMinJoint);
  const auto& sd = r.scheme(Scheme::SumDataOnly);
  const auto& sj = r.scheme(Scheme::SumJoint);

  const double nc_sum = empirical_cdf(nc.sum_se()).likely95();
  const double nc_min = empirical_cdf(nc.min_se()).likely95();
  const double sd_sum = empirical_cdf(sd.sum_se()).likely95();
  const double sj_sum = empirical_cdf(sj.sum_se()).likely95();
  const double mmj_sum = empirical_cdf(mmj.sum_se()).likely95();
  const auto user = empirical_cdf(mmj.per_user_se());

  bool ok = true;
  const double nc_median = empirical_cdf(nc.min_se()).median();
  ok &= band("a: NoControl min SE median", nc_median, 1e-12, 0.8);
  ok &= band("b: MaxMinJoint share of drops with min SE > 2", fraction_above(mmj.min_se(), 2.0),
             0.95, 1.0);
  ok &= band("c: SumDataOnly / NoControl sum SE p05 - 1", sd_sum / nc_sum - 1.0, 0.25, 0.65);
  ok &= band("c: SumJoint / SumDataOnly sum SE p05 - 1", sj_sum / sd_sum - 1.0, 0.05, 0.35);
  ok &= band("d: MaxMinDataOnly / NoControl min SE p05", empirical_cdf(mmd.min_se()).likely95() /
                                                             nc_min, 5.0, 14.0);
  ok &= band("d: MaxMinJoint / NoControl min SE p05",
             empirical_cdf(mmj.min_se()).likely95() / nc_min, 6.0, 15.0);
  const std::vector<double> sj_min = sj.min_se();
  ok &= band("d: SumJoint share of drops with min SE >= 1",
             static_cast<double>(std::count_if(sj_min.begin(), sj_min.end(),
                                               [](double x) { return x >= 1.0; })) /
                 static_cast<double>(sj_min.size()),
             0.90, 1.0);
  ok &= band("e: MaxMinJoint / NoControl sum SE p05 - 1", mmj_sum / nc_sum - 1.0, 0.20, 0.50);
  ok &= band("f: MaxMinJoint per-user SE IQR / median",
             (user.percentile(0.75) - user.percentile(0.25)) / user.median(), 0.0, 0.25);
  ok &= band("f: MaxMinJoint per-user SE median", user.median(), 1.5, 3.0);
  report(7, ok, "campaign reproduction bands a-f",
         std::to_string(r.drops.size()) + " drops kept, " +
             std::to_string(r.failed_drops.size()) + " failed");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void criterion_determinism(const CampaignResult& first, int drops) {
  const auto root = std::filesystem::temp_directory_path() / "mmpc_acceptance";
  std::filesystem::remove_all(root);
  cli::write_campaign(first, root / "a");
  CampaignConfig cfg = full_campaign(drops);
  cfg.threads = 3;  // a different worker count must not change any byte
  cli::write_campaign(run_campaign(cfg), root / "b");

  int files = 0, equal = 0;
  for (const auto& entry : std::filesystem::directory_iterator(root / "a")) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    equal += slurp(entry.path()) == slurp(root / "b" / entry.path().filename());
  }
  report(8, files > 0 && equal == files, "two seed-pinned campaigns give identical CSVs",
         std::to_string(equal) + "/" + std::to_string(files) + " CSV files byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
  const int drops = argc > 1 ? std::stoi(argv[1]) : 1000;
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  criterion_grid();
  criterion_training_length();
  criterion_tangent_monomial();
  criterion_estimator();
  note("elapsed " + num(elapsed()) + " s, starting campaign of " + std::to_string(drops) +
       " drops");

  const CampaignResult campaign = run_campaign(full_campaign(drops));
  note("campaign finished at " + num(elapsed()) + " s");
  criterion_slack(campaign);
  criterion_sca(campaign);
  criterion_campaign(campaign);
  criterion_determinism(campaign, drops);
  note("total " + num(elapsed()) + " s");

  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
