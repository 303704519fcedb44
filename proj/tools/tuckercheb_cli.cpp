// tuckercheb: experiment driver.
//
// Exit codes: 0 success, 1 selftest failure or unexpected error,
// 2 configuration error, 3 numerical failure.

#include "tuckercheb/experiments.hpp"
#include "tuckercheb/rand_linalg.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace ex = tuckercheb::experiments;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  bool timing = false;
  // (flag value, config key) pairs in the order they are checked.
  std::vector<std::pair<std::string, std::string>> values;
};

// Flags that map one-to-one onto config keys.
const std::vector<std::pair<std::string, std::string>> kFlagKeys = {
    {"--suite", "suite"},        {"--seed", "seed"},
    {"--method", "method"},      {"--n", "n"},
    {"--rank", "rank"},          {"--oversample", "oversample"},
    {"--levels", "levels"},      {"--kernel", "kernel"},
    {"--function", "function"},  {"--sigma", "sigma"},
    {"--points", "points"},      {"--target-points", "target_points"},
    {"--repeats", "repeats"},    {"--sample-rule", "sample_rule"},
    {"--out", "out"}};

void add_run_flags(CLI::App* sub, Flags& flags, std::map<std::string, std::string>& raw) {
  for (const auto& [flag, key] : kFlagKeys) sub->add_option(flag, raw[key], key);
  sub->add_option("--config", flags.config, "key = value config file with [sections]");
  sub->add_option("--set", flags.sets, "extra key=value override (repeatable)");
  sub->add_flag("--timing", flags.timing, "add a wall_time column");
}

ex::Settings collect_settings(const CLI::App* sub, const std::string& command,
                              const Flags& flags,
                              const std::map<std::string, std::string>& raw) {
  ex::Settings settings;
  if (!flags.config.empty()) {
    std::ifstream in(flags.config);
    if (!in) throw ex::ConfigError("cannot open config file '" + flags.config + "'");
    settings = ex::parse_config_file(in, command);
  }
  for (const auto& [flag, key] : kFlagKeys)
    if (sub->count(flag) > 0) settings.emplace_back(key, raw.at(key));
  for (const auto& s : flags.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ex::ConfigError("--set expects key=value, got '" + s + "'");
    settings.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (flags.timing) settings.emplace_back("timing", "true");
  return settings;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ex::ConfigError("cannot write '" + path + "' (key 'out')");
  out << text;
}

int run_command(const CLI::App* sub, const std::string& command, const Flags& flags,
                const std::map<std::string, std::string>& raw) {
  const ex::RunConfig cfg = ex::resolve_config(command, collect_settings(sub, command, flags, raw));
  const auto rows = ex::run(cfg);
  std::ostringstream csv;
  ex::write_csv(csv, cfg, rows);
  emit(cfg.out, csv.str());
  if (!cfg.out.empty()) ex::write_summary(std::cout, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chebyshev-Tucker function and kernel approximation experiments"};
  app.require_subcommand(1);

  const std::vector<std::string> commands = {"funapprox", "kernel", "gp"};
  std::map<std::string, Flags> flags;
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, CLI::App*> subs;
  subs["funapprox"] = app.add_subcommand("funapprox", "Chebyshev-Tucker interpolation of test functions");
  subs["kernel"] = app.add_subcommand("kernel", "low-rank kernel blocks between two boxes");
  subs["gp"] = app.add_subcommand("gp", "symmetric kernel construction and trace error");
  for (const auto& c : commands) add_run_flags(subs[c], flags[c], raw[c]);

  CLI::App* selftest = app.add_subcommand("selftest", "run the invariant checks");
  std::string selftest_out;
  selftest->add_option("--out", selftest_out, "write the report to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (selftest->parsed()) {
      const auto results = ex::run_selftest();
      std::ostringstream report;
      ex::write_selftest(report, results);
      emit(selftest_out, report.str());
      for (const auto& r : results)
        if (!r.pass) return kExitOther;
      return 0;
    }
    for (const auto& c : commands)
      if (subs[c]->parsed()) return run_command(subs[c], c, flags[c], raw[c]);
  } catch (const tuckercheb::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}
