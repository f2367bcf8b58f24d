#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mmpc/cli.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw mmpc::cli::ConfigError("cannot read config file " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pilot and payload power control for single-cell massive MIMO uplink"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> sets;

  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  const Flag flags[] = {
      {"--seed", "seed", "random seed (default 1)"},
      {"--drops", "num_drops", "number of user drops"},
      {"--schemes", "schemes", "comma-separated scheme list"},
      {"--out", "out", "output directory"},
      {"--mode", "mode", "joint or data-only"},
      {"--utility", "utility", "max-min or sum (sweep-tau)"},
      {"--beta", "beta", "comma-separated large-scale fading coefficients"},
      {"--threads", "threads", "worker threads, 0 for all cores"},
      {"--csv", "csv", "CSV output file (solve, sweep-tau)"},
  };
  std::vector<std::string> values(std::size(flags));
  std::string beta_file;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file");
    for (std::size_t i = 0; i < std::size(flags); ++i)
      sub->add_option(flags[i].name, values[i], flags[i].help);
    sub->add_option("--beta-file", beta_file, "file holding the beta list");
    sub->add_option("--set", sets, "override any config key, key=value");
  };

  auto* solve = app.add_subcommand("solve", "solve one instance for each requested scheme");
  auto* campaign = app.add_subcommand("campaign", "Monte Carlo campaign with CSV and CDF output");
  auto* verify = app.add_subcommand("verify", "run the oracle verification suites");
  auto* sweep = app.add_subcommand("sweep-tau", "re-solve over training lengths tau_p >= K");
  for (auto* s : {solve, campaign, verify, sweep}) add_common(s);

  CLI11_PARSE(app, argc, argv);

  using namespace mmpc::cli;
  RunConfig cfg;
  try {
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!beta_file.empty()) {
      std::string text = read_file(beta_file);
      for (char& c : text)
        if (c == '\n' || c == ' ' || c == '\t' || c == '\r') c = ',';
      std::string joined;
      for (const auto& part : [&] {
             std::vector<std::string> p;
             std::istringstream in(text);
             for (std::string x; std::getline(in, x, ',');)
               if (!x.empty()) p.push_back(x);
             return p;
           }())
        joined += (joined.empty() ? "" : ",") + part;
      overrides.emplace_back("beta", joined);
    }
    for (std::size_t i = 0; i < std::size(flags); ++i)
      if (!values[i].empty()) overrides.emplace_back(flags[i].key, values[i]);
    cfg = parse_config(config_path.empty() ? "" : read_file(config_path), overrides);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*solve) return cmd_solve(cfg, std::cout, std::cerr);
    if (*campaign) return cmd_campaign(cfg, std::cout, std::cerr);
    if (*verify) return cmd_verify(cfg, std::cout, std::cerr);
    if (*sweep) return cmd_sweep_tau(cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
