#include "mmpc/cli.hpp"

#include "mmpc/gp.hpp"
#include "mmpc/oracle.hpp"
#include "mmpc/sumse.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

namespace mmpc::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  return parts;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  const char* s = v.c_str();
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(s, &end);
  if (v.empty() || end != s + v.size() || errno == ERANGE || !std::isfinite(d))
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  return d;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int x{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

Mode parse_mode(const std::string& v) {
  if (v == "joint") return Mode::Joint;
  if (v == "data-only") return Mode::DataOnly;
  throw ConfigError("mode: expected 'joint' or 'data-only', got '" + v + "'");
}

Utility parse_utility(const std::string& v) {
  if (v == "max-min") return Utility::MaxMin;
  if (v == "sum") return Utility::Sum;
  throw ConfigError("utility: expected 'max-min' or 'sum', got '" + v + "'");
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

const std::vector<std::pair<std::string, Field>>& fields() {
  using C = RunConfig;
  using S = std::string;
  using O = std::optional<std::string>;
  static const std::vector<std::pair<std::string, Field>> f{
      {"antennas", {[](C& c, const S& v) { c.antennas = parse_int<int>("antennas", v); },
                    [](const C& c) -> O { return std::to_string(c.antennas); }}},
      {"users", {[](C& c, const S& v) { c.users = parse_int<int>("users", v); },
                 [](const C& c) -> O { return std::to_string(c.users); }}},
      {"coherence", {[](C& c, const S& v) { c.coherence = parse_int<int>("coherence", v); },
                     [](const C& c) -> O { return std::to_string(c.coherence); }}},
      {"pilot_length",
       {[](C& c, const S& v) { c.pilot_length = parse_int<int>("pilot_length", v); },
        [](const C& c) -> O {
          return c.pilot_length ? O(std::to_string(*c.pilot_length)) : std::nullopt;
        }}},
      {"cell_radius", {[](C& c, const S& v) { c.cell_radius = parse_double("cell_radius", v); },
                       [](const C& c) -> O { return fmt(c.cell_radius); }}},
      {"min_distance",
       {[](C& c, const S& v) { c.min_distance = parse_double("min_distance", v); },
        [](const C& c) -> O { return fmt(c.min_distance); }}},
      {"pathloss_exponent",
       {[](C& c, const S& v) { c.pathloss_exponent = parse_double("pathloss_exponent", v); },
        [](const C& c) -> O { return fmt(c.pathloss_exponent); }}},
      {"edge_snr_db", {[](C& c, const S& v) { c.edge_snr_db = parse_double("edge_snr_db", v); },
                       [](const C& c) -> O { return fmt(c.edge_snr_db); }}},
      {"energy_budget",
       {[](C& c, const S& v) { c.energy_budget = parse_double("energy_budget", v); },
        [](const C& c) -> O { return c.energy_budget ? O(fmt(*c.energy_budget)) : std::nullopt; }}},
      {"num_drops", {[](C& c, const S& v) { c.num_drops = parse_int<int>("num_drops", v); },
                     [](const C& c) -> O { return std::to_string(c.num_drops); }}},
      {"seed", {[](C& c, const S& v) { c.seed = parse_int<std::uint64_t>("seed", v); },
                [](const C& c) -> O { return std::to_string(c.seed); }}},
      {"schemes",
       {[](C& c, const S& v) {
          std::vector<Scheme> list;
          for (const auto& name : split(v, ',')) {
            const auto s = scheme_from_string(name);
            if (!s) throw ConfigError("schemes: unknown scheme '" + name + "'");
            if (std::find(list.begin(), list.end(), *s) != list.end())
              throw ConfigError("schemes: '" + name + "' listed twice");
            list.push_back(*s);
          }
          c.schemes = std::move(list);
        },
        [](const C& c) -> O {
          std::string s;
          for (Scheme x : c.schemes) s += (s.empty() ? "" : ",") + std::string(to_string(x));
          return s;
        }}},
      {"out", {[](C& c, const S& v) { c.out = v; }, [](const C& c) -> O { return c.out; }}},
      {"mode", {[](C& c, const S& v) { c.mode = parse_mode(v); },
                [](const C& c) -> O { return std::string(to_string(c.mode)); }}},
      {"utility", {[](C& c, const S& v) { c.utility = parse_utility(v); },
                   [](const C& c) -> O { return std::string(to_string(c.utility)); }}},
      {"threads", {[](C& c, const S& v) { c.threads = parse_int<int>("threads", v); },
                   [](const C& c) -> O { return std::to_string(c.threads); }}},
      {"gp_gap_tolerance",
       {[](C& c, const S& v) { c.gp_gap_tolerance = parse_double("gp_gap_tolerance", v); },
        [](const C& c) -> O { return fmt(c.gp_gap_tolerance); }}},
      {"gp_max_newton",
       {[](C& c, const S& v) { c.gp_max_newton = parse_int<int>("gp_max_newton", v); },
        [](const C& c) -> O { return std::to_string(c.gp_max_newton); }}},
      {"sca_max_iterations",
       {[](C& c, const S& v) { c.sca_max_iterations = parse_int<int>("sca_max_iterations", v); },
        [](const C& c) -> O { return std::to_string(c.sca_max_iterations); }}},
      {"sca_tolerance",
       {[](C& c, const S& v) { c.sca_tolerance = parse_double("sca_tolerance", v); },
        [](const C& c) -> O { return fmt(c.sca_tolerance); }}},
      {"tau_extra", {[](C& c, const S& v) { c.tau_extra = parse_int<int>("tau_extra", v); },
                     [](const C& c) -> O { return std::to_string(c.tau_extra); }}},
      {"beta",
       {[](C& c, const S& v) {
          std::vector<double> b;
          for (const auto& x : split(v, ',')) b.push_back(parse_double("beta", x));
          c.beta = std::move(b);
        },
        [](const C& c) -> O {
          if (c.beta.empty()) return std::nullopt;
          std::string s;
          for (double x : c.beta) s += (s.empty() ? "" : ",") + fmt(x);
          return s;
        }}},
      {"csv", {[](C& c, const S& v) { c.csv = v; },
               [](const C& c) -> O { return c.csv.empty() ? O() : O(c.csv); }}},
  };
  return f;
}

const Field* find_field(const std::string& key) {
  for (const auto& [k, f] : fields())
    if (k == key) return &f;
  return nullptr;
}

std::string percent(double ratio) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << 100.0 * (ratio - 1.0) << "%";
  return s.str();
}

void write_cdf(const std::filesystem::path& path, const CdfSummary& c) {
  std::ofstream f(path, std::ios::binary);
  f << "value,cdf\n";
  const auto n = static_cast<double>(c.sorted.size());
  for (std::size_t i = 0; i < c.sorted.size(); ++i)
    f << fmt(c.sorted[i]) << "," << fmt(static_cast<double>(i + 1) / n) << "\n";
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

const char* scheme_label(Scheme s) {
  switch (s) {
    case Scheme::MaxMinJoint: return "max-min";
    case Scheme::SumJoint: return "sum";
    case Scheme::NoControl: return "no control";
    case Scheme::MaxMinDataOnly: return "max-min (data only)";
    case Scheme::SumDataOnly: return "sum (data only)";
  }
  return "";
}

LargeScaleFading instance_fading(const RunConfig& cfg) {
  if (cfg.beta.empty()) throw ConfigError("beta: a comma-separated list of K values is required");
  if (static_cast<int>(cfg.beta.size()) != cfg.users)
    throw ConfigError("beta: expected " + std::to_string(cfg.users) + " values, got " +
                      std::to_string(cfg.beta.size()));
  Eigen::VectorXd b(cfg.users);
  for (int k = 0; k < cfg.users; ++k) b(k) = cfg.beta[static_cast<std::size_t>(k)];
  LargeScaleFading f(b);
  f.validate(cfg.system());
  return f;
}

// Random posynomial with up to 5 terms over up to 4 variables.
gp::Posynomial random_posynomial(std::mt19937_64& rng, int vars) {
  std::uniform_int_distribution<int> terms(1, 5);
  std::uniform_real_distribution<double> coeff(0.1, 3.0), expo(-2.0, 2.0);
  std::vector<gp::Monomial> t;
  const int n = terms(rng);
  for (int j = 0; j < n; ++j) {
    gp::Monomial m(coeff(rng));
    for (int v = 0; v < vars; ++v) m *= gp::Monomial::variable(v, expo(rng));
    t.push_back(m);
  }
  return gp::Posynomial(std::move(t));
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

SystemConfig RunConfig::system() const {
  SystemConfig s;
  s.antennas = antennas;
  s.users = users;
  s.coherence = coherence;
  s.pilot_length = pilot_length.value_or(users);
  s.energy_budget = energy_budget.value_or(compute_emax(drops(), coherence));
  return s;
}

DropConfig RunConfig::drops() const {
  DropConfig d;
  d.cell_radius = cell_radius;
  d.min_distance = min_distance;
  d.pathloss_exponent = pathloss_exponent;
  d.num_drops = num_drops;
  d.seed = seed;
  d.edge_snr_linear = std::pow(10.0, edge_snr_db / 10.0);
  return d;
}

CampaignConfig RunConfig::campaign() const {
  CampaignConfig c;
  c.drops = drops();
  c.antennas = antennas;
  c.users = users;
  c.coherence = coherence;
  c.schemes = schemes;
  c.threads = threads;
  c.sca = sca_options();
  return c;
}

gp::SolverOptions RunConfig::solver_options() const {
  gp::SolverOptions o;
  o.gap_tolerance = gp_gap_tolerance;
  o.max_newton_steps = gp_max_newton;
  return o;
}

ScaOptions RunConfig::sca_options() const {
  ScaOptions o;
  o.max_iterations = sca_max_iterations;
  o.tolerance = sca_tolerance;
  o.gp = solver_options();
  return o;
}

void RunConfig::validate() const {
  try {
    system().validate();
    drops().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (schemes.empty()) throw ConfigError("schemes: at least one scheme is required");
  if (threads < 0) throw ConfigError("threads: must be >= 0");
  if (!(gp_gap_tolerance > 0.0)) throw ConfigError("gp_gap_tolerance: must be positive");
  if (gp_max_newton < 1) throw ConfigError("gp_max_newton: must be >= 1");
  if (sca_max_iterations < 1) throw ConfigError("sca_max_iterations: must be >= 1");
  if (!(sca_tolerance > 0.0)) throw ConfigError("sca_tolerance: must be positive");
  if (tau_extra < 0) throw ConfigError("tau_extra: must be >= 0");
  if (out.empty()) throw ConfigError("out: must not be empty");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, f] : fields()) k.push_back(name);
    return k;
  }();
  return keys;
}

void set_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError("unknown key '" + key + "'");
  f->set(cfg, value);
}

RunConfig parse_config(const std::string& text,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    try {
      set_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  for (const auto& [k, v] : overrides) set_value(cfg, k, v);
  cfg.validate();
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::string s;
  for (const auto& [name, f] : fields())
    if (const auto v = f.get(cfg)) s += name + " = " + *v + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// solve

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  LargeScaleFading fading;
  try {
    fading = instance_fading(cfg);
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  const SystemConfig sys = cfg.system();
  std::ofstream csv;
  if (!cfg.csv.empty()) {
    csv.open(cfg.csv, std::ios::binary);
    if (!csv) {
      err << "cannot write " << cfg.csv << "\n";
      return 1;
    }
    csv << "scheme,user,beta,p_p,p_u,slack,sinr,se\n";
  }

  out << "M=" << sys.antennas << " K=" << sys.users << " T=" << sys.coherence
      << " tau_p=" << sys.pilot_length << " E_max=" << fmt(sys.energy_budget) << "\n";
  bool ok = true;
  for (Scheme s : cfg.schemes) {
    PowerAllocation alloc;
    std::string status;
    bool solved = true;
    switch (s) {
      case Scheme::NoControl:
        alloc = equal_power_allocation(sys);
        status = "fixed";
        break;
      case Scheme::MaxMinJoint:
      case Scheme::MaxMinDataOnly: {
        const Mode m = s == Scheme::MaxMinJoint ? Mode::Joint : Mode::DataOnly;
        const auto r = solve_maxmin(fading, sys, m, cfg.solver_options());
        alloc = r.alloc;
        status = gp::to_string(r.status);
        solved = r.status == gp::GpStatus::Optimal;
        break;
      }
      case Scheme::SumJoint:
      case Scheme::SumDataOnly: {
        const Mode m = s == Scheme::SumJoint ? Mode::Joint : Mode::DataOnly;
        const auto r = sca_solve(fading, sys, m, cfg.sca_options(), {equal_power_allocation(sys)});
        alloc = r.alloc;
        status = to_string(r.status);
        solved = r.status == ScaStatus::Converged;
        break;
      }
    }
    ok = ok && solved;
    const SeReport rep = se_report(alloc, fading, sys);
    const Eigen::VectorXd slack = energy_slack(alloc, sys);
    out << "\n[" << to_string(s) << "] status=" << status << " sum_se=" << fmt(rep.sum_se)
        << " min_se=" << fmt(rep.min_se)
        << " max_slack/E_max=" << fmt(slack.cwiseAbs().maxCoeff() / sys.energy_budget) << "\n";
    out << "  user  beta                     p_p                      p_u                      "
           "sinr                     se\n";
    for (int k = 0; k < sys.users; ++k) {
      out << "  " << std::setw(4) << k << "  " << std::setw(24) << std::left << fmt(fading.beta(k))
          << " " << std::setw(24) << fmt(alloc.pilot(k)) << " " << std::setw(24)
          << fmt(alloc.payload(k)) << " " << std::setw(24) << fmt(rep.sinr(k)) << " "
          << fmt(rep.se(k)) << std::right << "\n";
      if (csv.is_open())
        csv << to_string(s) << "," << k << "," << fmt(fading.beta(k)) << ","
            << fmt(alloc.pilot(k)) << "," << fmt(alloc.payload(k)) << "," << fmt(slack(k)) << ","
            << fmt(rep.sinr(k)) << "," << fmt(rep.se(k)) << "\n";
    }
  }
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// campaign

void write_campaign(const CampaignResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "per_drop.csv", std::ios::binary);
    f << "drop,scheme,user,se,sum_se,min_se,sinr,p_p,p_u\n";
    const std::size_t drops = result.drops.size();
    for (std::size_t i = 0; i < drops; ++i)
      for (const auto& sr : result.schemes) {
        const auto& r = sr.records[i];
        for (Eigen::Index k = 0; k < r.report.se.size(); ++k)
          f << r.drop << "," << to_string(sr.scheme) << "," << k << "," << fmt(r.report.se(k))
            << "," << fmt(r.report.sum_se) << "," << fmt(r.report.min_se) << ","
            << fmt(r.report.sinr(k)) << "," << fmt(r.alloc.pilot(k)) << ","
            << fmt(r.alloc.payload(k)) << "\n";
      }
    if (!f) throw std::runtime_error("cannot write per_drop.csv");
  }
  {
    std::ofstream f(dir / "diagnostics.csv", std::ios::binary);
    f << "drop,scheme,status,iterations,max_slack,stationarity,trace_length\n";
    for (std::size_t i = 0; i < result.drops.size(); ++i)
      for (const auto& sr : result.schemes) {
        const auto& r = sr.records[i];
        f << r.drop << "," << to_string(sr.scheme) << "," << r.status << "," << r.iterations
          << "," << fmt(r.max_slack) << "," << fmt(r.stationarity) << ","
          << r.objective_trace.size() << "\n";
      }
    if (!f) throw std::runtime_error("cannot write diagnostics.csv");
  }
  for (const auto& sr : result.schemes) {
    const std::string name = to_string(sr.scheme);
    write_cdf(dir / ("cdf_sum_se_" + name + ".csv"), empirical_cdf(sr.sum_se()));
    write_cdf(dir / ("cdf_min_se_" + name + ".csv"), empirical_cdf(sr.min_se()));
    write_cdf(dir / ("cdf_user_se_" + name + ".csv"), empirical_cdf(sr.per_user_se()));
  }

  const SystemConfig& sys = result.system;
  {
    std::ofstream f(dir / "plots.txt", std::ios::binary);
    const struct {
      const char* metric;
      const char* title;
      const char* axis;
    } figs[] = {{"sum_se", "CDF of the sum SE", "sum SE [bit/s/Hz]"},
                {"min_se", "CDF of the minimum SE", "minimum SE over users [bit/s/Hz]"},
                {"user_se", "CDF of the per user SE", "per-user SE [bit/s/Hz]"}};
    for (const auto& fig : figs) {
      f << "figure: " << fig.title << " (M=" << sys.antennas << ", K=" << sys.users
        << ", T=" << sys.coherence << ")\n";
      f << "  x-axis: " << fig.axis << "\n  y-axis: CDF, 0 to 1\n  series:\n";
      for (const auto& sr : result.schemes)
        f << "    " << scheme_label(sr.scheme) << ": cdf_" << fig.metric << "_"
          << to_string(sr.scheme) << ".csv (columns value, cdf; step plot)\n";
      f << "\n";
    }
  }
  {
    std::ofstream f(dir / "summary.txt", std::ios::binary);
    f << "drops kept: " << result.drops.size() << ", failed: " << result.failed_drops.size()
      << "\n\n";
    f << "scheme           sum_se p05   sum_se p50   min_se p05   min_se p50   user_se p25  "
         "user_se p50  user_se p75\n";
    for (const auto& sr : result.schemes) {
      const auto a = empirical_cdf(sr.sum_se()), b = empirical_cdf(sr.min_se()),
                 c = empirical_cdf(sr.per_user_se());
      char line[256];
      std::snprintf(line, sizeof line,
                    "%-16s %12.4f %12.4f %12.4f %12.4f %12.4f %12.4f %12.4f\n",
                    to_string(sr.scheme), a.likely95(), a.median(), b.likely95(), b.median(),
                    c.percentile(0.25), c.median(), c.percentile(0.75));
      f << line;
    }
    const auto has = [&](Scheme s) {
      return std::any_of(result.schemes.begin(), result.schemes.end(),
                         [&](const auto& r) { return r.scheme == s; });
    };
    if (has(Scheme::NoControl)) {
      const auto& nc = result.scheme(Scheme::NoControl);
      const double nc_sum = empirical_cdf(nc.sum_se()).likely95();
      const double nc_sum_med = empirical_cdf(nc.sum_se()).median();
      const double nc_min = empirical_cdf(nc.min_se()).likely95();
      f << "\nrelative to NoControl at the 0.95-likely point:\n";
      for (const auto& sr : result.schemes) {
        if (sr.scheme == Scheme::NoControl) continue;
        const auto a = empirical_cdf(sr.sum_se());
        const double m = empirical_cdf(sr.min_se()).likely95();
        f << "  " << std::setw(16) << std::left << to_string(sr.scheme) << std::right
          << " sum SE " << percent(a.likely95() / nc_sum) << ", min SE x"
          << std::setprecision(3) << m / nc_min << ", sum SE shift " << std::fixed
          << std::setprecision(3) << a.likely95() - nc_sum << " (p05) / "
          << a.median() - nc_sum_med << " (p50) bit/s/Hz\n"
          << std::defaultfloat;
      }
    }
  }
}

int cmd_campaign(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  CampaignResult result;
  try {
    result = run_campaign(cfg.campaign());
  } catch (const std::exception& e) {
    err << "campaign error: " << e.what() << "\n";
    return 1;
  }
  try {
    write_campaign(result, cfg.out);
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << "\n";
    return 1;
  }
  std::ifstream summary(std::filesystem::path(cfg.out) / "summary.txt");
  out << summary.rdbuf();
  out << "\nwrote " << cfg.out << "/per_drop.csv, diagnostics.csv, cdf_*.csv, plots.txt\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify

SuiteResult verify_grid_equivalence(const RunConfig& cfg) {
  SuiteResult r{"grid equivalence (max-min, K=2, T=40, 400x400 grid)",
                "GP >= grid*(1-1e-7) and GP <= grid*1.01, 50/50 instances", false, ""};
  DropConfig dc = cfg.drops();
  std::mt19937_64 rng(drop_seed(cfg.seed, 0x6772696400ULL));
  int good = 0;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    SystemConfig sys;
    sys.antennas = i % 2 ? 100 : 20;
    sys.users = 2;
    sys.coherence = 40;
    sys.pilot_length = 2;
    sys.energy_budget = compute_emax(dc, 40);
    const auto f = drop_users(rng, dc, 2).fading;
    const auto s = solve_maxmin(f, sys, Mode::Joint, cfg.solver_options());
    const auto g = oracle::grid_search(f, sys, Utility::MaxMin);
    const double rel = s.lambda / g.min_sinr - 1.0;
    worst = std::max(worst, std::abs(rel));
    good += s.status == gp::GpStatus::Optimal && rel >= -1e-7 && rel <= 0.01;
  }
  r.passed = good == 50;
  r.detail = std::to_string(good) + "/50 within band, worst |GP/grid - 1| = " + fmt(worst);
  return r;
}

SuiteResult verify_monomial_approximation(const RunConfig& cfg) {
  SuiteResult r{"tangent monomial approximation (200 random posynomials)",
                "tangency 1e-12, gradient 1e-5 relative, g~ <= g(1+1e-12) at 1e4 points each",
                false, ""};
  std::mt19937_64 rng(drop_seed(cfg.seed, 0x6c656d6d61ULL));
  std::uniform_int_distribution<int> nvars(1, 4);
  std::uniform_real_distribution<double> logx(-2.0, 2.0);
  int failures = 0;
  double worst_tan = 0.0, worst_grad = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int n = nvars(rng);
    const gp::Posynomial g = random_posynomial(rng, n);
    Eigen::VectorXd x0(n);
    for (int v = 0; v < n; ++v) x0(v) = std::exp(logx(rng));
    const gp::Monomial gt = gp::monomial_approximation(g, x0);
    const double tan = std::abs(gp::evaluate(gt, x0) / gp::evaluate(g, x0) - 1.0);
    worst_tan = std::max(worst_tan, tan);
    bool ok = tan <= 1e-12;
    const Eigen::VectorXd grad = gp::gradient(g, x0);
    for (int v = 0; v < n; ++v) {
      const double h = 1e-6 * x0(v);
      Eigen::VectorXd xp = x0, xm = x0;
      xp(v) += h;
      xm(v) -= h;
      const double fd = (gp::evaluate(gt, xp) - gp::evaluate(gt, xm)) / (2 * h);
      const double err = std::abs(fd - grad(v)) / std::max(std::abs(grad(v)), 1e-300);
      worst_grad = std::max(worst_grad, std::abs(grad(v)) > 1e-12 ? err : 0.0);
      ok = ok && (std::abs(grad(v)) <= 1e-12 || err <= 1e-5);
    }
    for (int s = 0; s < 10000 && ok; ++s) {
      Eigen::VectorXd x(n);
      for (int v = 0; v < n; ++v) x(v) = std::exp(3.0 * logx(rng));
      ok = gp::evaluate(gt, x) <= gp::evaluate(g, x) * (1.0 + 1e-12);
    }
    failures += !ok;
  }
  r.passed = failures == 0;
  r.detail = std::to_string(200 - failures) + "/200 passed, worst tangency " + fmt(worst_tan) +
             ", worst gradient " + fmt(worst_grad);
  return r;
}

SuiteResult verify_training_length(const RunConfig& cfg) {
  SuiteResult r{"training length sweep (K=3, M=30, T=30, tau_p=3..15)",
                "argmax tau_p = 3 for both utilities, 20/20 instances", false, ""};
  DropConfig dc = cfg.drops();
  std::mt19937_64 rng(drop_seed(cfg.seed, 0x746175ULL));
  SystemConfig sys;
  sys.antennas = 30;
  sys.users = 3;
  sys.coherence = 30;
  sys.pilot_length = 3;
  sys.energy_budget = compute_emax(dc, 30);
  int good = 0;
  for (int i = 0; i < 20; ++i) {
    const auto f = drop_users(rng, dc, 3).fading;
    bool ok = true;
    for (Utility u : {Utility::MaxMin, Utility::Sum}) {
      const auto pts = sweep_tau(f, sys, Mode::Joint, u, 12, cfg.solver_options());
      const auto best = std::max_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.utility < b.utility;
      });
      ok = ok && best->pilot_length == 3 &&
           std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.solved; });
    }
    good += ok;
  }
  r.passed = good == 20;
  r.detail = std::to_string(good) + "/20 peak at tau_p = K";
  return r;
}

SuiteResult verify_estimator(const RunConfig& cfg) {
  SuiteResult r{"MMSE estimate moments (M=50, gamma=0.5, 1e5 samples)",
                "estimate variance and E[1/||g_hat||^2] within 2% of closed forms", false, ""};
  const auto s = oracle::validate_estimator(50, 1.0, 1.0, 1, 100000, cfg.seed);
  const double ev = std::abs(s.estimate_variance / s.target_variance - 1.0);
  const double ei = std::abs(s.inverse_moment / s.target_inverse_moment - 1.0);
  r.passed = ev <= 0.02 && ei <= 0.02;
  r.detail = "variance error " + fmt(ev) + ", inverse-moment error " + fmt(ei) +
             ", estimate/error correlation " + fmt(s.correlation);
  return r;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const std::vector<std::function<SuiteResult(const RunConfig&)>> suites{
      verify_grid_equivalence, verify_monomial_approximation, verify_training_length,
      verify_estimator};
  bool all = true;
  for (const auto& suite : suites) {
    const SuiteResult s = suite(cfg);
    all = all && s.passed;
    out << (s.passed ? "PASS " : "FAIL ") << s.name << "\n  tolerance: " << s.tolerance
        << "\n  result:    " << s.detail << "\n";
  }
  out << (all ? "all suites passed\n" : "some suites failed\n");
  return all ? 0 : 1;
}

// ---------------------------------------------------------------------------
// sweep-tau

int cmd_sweep_tau(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  LargeScaleFading fading;
  try {
    fading = instance_fading(cfg);
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  const auto pts =
      sweep_tau(fading, cfg.system(), cfg.mode, cfg.utility, cfg.tau_extra, cfg.solver_options());
  std::ofstream csv;
  if (!cfg.csv.empty()) {
    csv.open(cfg.csv, std::ios::binary);
    csv << "pilot_length,utility,solved\n";
  }
  out << "utility=" << to_string(cfg.utility) << " mode=" << to_string(cfg.mode) << "\n";
  out << "tau_p  utility [bit/s/Hz]\n";
  bool ok = true;
  for (const auto& p : pts) {
    out << std::setw(5) << p.pilot_length << "  " << fmt(p.utility) << (p.solved ? "" : "  (unsolved)")
        << "\n";
    if (csv.is_open())
      csv << p.pilot_length << "," << fmt(p.utility) << "," << (p.solved ? 1 : 0) << "\n";
    ok = ok && p.solved;
  }
  const auto best = std::max_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.utility < b.utility;
  });
  out << "best tau_p = " << best->pilot_length << "\n";
  return ok ? 0 : 1;
}

}  // namespace mmpc::cli
