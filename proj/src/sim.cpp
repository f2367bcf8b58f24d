#include "mmpc/sim.hpp"

#include "mmpc/maxmin.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mmpc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double max_relative_slack(const PowerAllocation& a, const SystemConfig& cfg) {
  return energy_slack(a, cfg).cwiseAbs().maxCoeff() / cfg.energy_budget;
}

SchemeRecord from_maxmin(const MaxMinSolution& s, const SystemConfig& cfg) {
  SchemeRecord r;
  r.alloc = s.alloc;
  r.report = s.report;
  r.ok = s.status == gp::GpStatus::Optimal;
  r.status = gp::to_string(s.status);
  r.iterations = s.gp_iterations;
  r.max_slack = max_relative_slack(s.alloc, cfg);
  return r;
}

SchemeRecord from_sum(const SumSeSolution& s, const SystemConfig& cfg) {
  SchemeRecord r;
  r.alloc = s.alloc;
  r.report = s.report;
  r.ok = s.status != ScaStatus::SubproblemFailed;
  r.converged = s.status == ScaStatus::Converged;
  r.status = to_string(s.status);
  r.iterations = s.sca_iterations;
  r.max_slack = max_relative_slack(s.alloc, cfg);
  r.stationarity = s.stationarity;
  r.objective_trace = s.objective_trace;
  return r;
}

// Evaluates the requested schemes on one drop, in an order that lets the
// sum-SE schemes start from the weaker schemes' outputs.
std::vector<SchemeRecord> evaluate_drop(const CampaignConfig& cc, const SystemConfig& sys,
                                        const LargeScaleFading& fading) {
  auto wants = [&](Scheme s) {
    return std::find(cc.schemes.begin(), cc.schemes.end(), s) != cc.schemes.end();
  };
  const PowerAllocation equal = equal_power_allocation(sys);
  std::vector<std::optional<SchemeRecord>> slot(all_schemes().size());
  auto put = [&](Scheme s, SchemeRecord r) { slot[static_cast<std::size_t>(s)] = std::move(r); };

  if (wants(Scheme::NoControl)) {
    SchemeRecord r;
    r.alloc = equal;
    r.report = se_report(equal, fading, sys);
    r.status = "fixed";
    r.max_slack = max_relative_slack(equal, sys);
    put(Scheme::NoControl, std::move(r));
  }
  if (wants(Scheme::MaxMinDataOnly))
    put(Scheme::MaxMinDataOnly,
        from_maxmin(solve_maxmin(fading, sys, Mode::DataOnly, cc.sca.gp), sys));
  if (wants(Scheme::MaxMinJoint))
    put(Scheme::MaxMinJoint, from_maxmin(solve_maxmin(fading, sys, Mode::Joint, cc.sca.gp), sys));

  std::optional<PowerAllocation> data_only_sum;
  if (wants(Scheme::SumDataOnly)) {
    const SumSeSolution s = sca_solve(fading, sys, Mode::DataOnly, cc.sca, {equal});
    data_only_sum = s.alloc;
    put(Scheme::SumDataOnly, from_sum(s, sys));
  }
  if (wants(Scheme::SumJoint)) {
    std::vector<PowerAllocation> starts{equal};
    if (data_only_sum) starts.push_back(*data_only_sum);
    put(Scheme::SumJoint, from_sum(sca_solve(fading, sys, Mode::Joint, cc.sca, starts), sys));
  }

  std::vector<SchemeRecord> out;
  for (Scheme s : cc.schemes) out.push_back(*slot[static_cast<std::size_t>(s)]);
  return out;
}

}  // namespace

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::MaxMinJoint: return "MaxMinJoint";
    case Scheme::SumJoint: return "SumJoint";
    case Scheme::NoControl: return "NoControl";
    case Scheme::MaxMinDataOnly: return "MaxMinDataOnly";
    case Scheme::SumDataOnly: return "SumDataOnly";
  }
  return "unknown";
}

std::optional<Scheme> scheme_from_string(const std::string& name) {
  for (Scheme s : all_schemes())
    if (name == to_string(s)) return s;
  return std::nullopt;
}

const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> v{Scheme::MaxMinJoint, Scheme::SumJoint, Scheme::NoControl,
                                     Scheme::MaxMinDataOnly, Scheme::SumDataOnly};
  return v;
}

void DropConfig::validate() const {
  if (!(min_distance > 0.0 && min_distance < cell_radius))
    throw std::invalid_argument("min_distance must satisfy 0 < min_distance < cell_radius");
  if (!(pathloss_exponent > 2.0))
    throw std::invalid_argument("pathloss_exponent must be > 2");
  if (num_drops < 1) throw std::invalid_argument("num_drops must be >= 1");
  if (!(edge_snr_linear > 0.0) || !std::isfinite(edge_snr_linear))
    throw std::invalid_argument("edge_snr must be positive and finite");
}

std::uint64_t drop_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ index);
}

double uniform53(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Drop drop_users(std::mt19937_64& rng, const DropConfig& cfg, int users) {
  cfg.validate();
  const double r2max = cfg.cell_radius * cfg.cell_radius;
  const double r2min = cfg.min_distance * cfg.min_distance;
  Drop d;
  d.distances.resize(users);
  Eigen::VectorXd beta(users);
  for (int k = 0; k < users; ++k) {
    const double r = std::sqrt(uniform53(rng) * (r2max - r2min) + r2min);
    d.distances(k) = r;
    beta(k) = std::pow(cfg.cell_radius / r, cfg.pathloss_exponent);
  }
  d.fading = LargeScaleFading(beta);
  return d;
}

double compute_emax(const DropConfig& cfg, int coherence, bool normalized) {
  const double e = cfg.edge_snr_linear * coherence;
  return normalized ? e : e * std::pow(cfg.cell_radius, cfg.pathloss_exponent);
}

SystemConfig CampaignConfig::system() const {
  SystemConfig s;
  s.antennas = antennas;
  s.users = users;
  s.coherence = coherence;
  s.pilot_length = users;
  s.energy_budget = compute_emax(drops, coherence);
  return s;
}

std::vector<double> SchemeResult::sum_se() const {
  std::vector<double> v;
  for (const auto& r : records) v.push_back(r.report.sum_se);
  return v;
}

std::vector<double> SchemeResult::min_se() const {
  std::vector<double> v;
  for (const auto& r : records) v.push_back(r.report.min_se);
  return v;
}

std::vector<double> SchemeResult::per_user_se() const {
  std::vector<double> v;
  for (const auto& r : records)
    for (Eigen::Index k = 0; k < r.report.se.size(); ++k) v.push_back(r.report.se(k));
  return v;
}

const SchemeResult& CampaignResult::scheme(Scheme s) const {
  for (const auto& r : schemes)
    if (r.scheme == s) return r;
  throw std::out_of_range(std::string("scheme not in campaign: ") + to_string(s));
}

CampaignResult run_campaign(const CampaignConfig& cc) {
  cc.drops.validate();
  const SystemConfig sys = cc.system();
  sys.validate();
  if (cc.schemes.empty()) throw std::invalid_argument("no schemes requested");

  const int n = cc.drops.num_drops;
  std::vector<Drop> drops(static_cast<std::size_t>(n));
  std::vector<std::vector<SchemeRecord>> rows(static_cast<std::size_t>(n));

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        std::mt19937_64 rng(drop_seed(cc.drops.seed, static_cast<std::uint64_t>(i)));
        Drop d = drop_users(rng, cc.drops, sys.users);
        rows[static_cast<std::size_t>(i)] = evaluate_drop(cc, sys, d.fading);
        drops[static_cast<std::size_t>(i)] = std::move(d);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  int threads = cc.threads > 0 ? cc.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, n);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  CampaignResult out;
  out.system = sys;
  for (Scheme s : cc.schemes) out.schemes.push_back(SchemeResult{s, {}});
  for (int i = 0; i < n; ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    const bool ok = std::all_of(row.begin(), row.end(), [](const auto& r) { return r.ok; });
    if (!ok) {
      out.failed_drops.push_back(i);
      continue;
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j].drop = i;
      out.schemes[j].records.push_back(std::move(row[j]));
    }
    out.drops.push_back(std::move(drops[static_cast<std::size_t>(i)]));
  }
  if (out.failed_drops.size() > static_cast<std::size_t>(cc.max_failure_rate * n))
    throw std::runtime_error("campaign failed: " + std::to_string(out.failed_drops.size()) +
                             " of " + std::to_string(n) + " drops had solver failures");
  return out;
}

double CdfSummary::percentile(double p) const {
  if (sorted.empty()) throw std::logic_error("empty distribution");
  const auto n = static_cast<double>(sorted.size());
  const double rank = std::ceil(p * n - 1e-9);
  const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, n)) - 1;
  return sorted[idx];
}

CdfSummary empirical_cdf(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empirical_cdf needs at least one value");
  std::sort(values.begin(), values.end());
  return CdfSummary{std::move(values)};
}

}  // namespace mmpc
