#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qwalk/config.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/experiments.hpp"
#include "qwalk/parallel.hpp"

namespace {

enum ExitCode { kPass = 0, kAssertionFailed = 1, kConfigError = 2, kRuntimeError = 3, kInterrupted = 4 };

struct Invocation {
  std::string config_path;
  std::vector<std::string> overrides;
  std::vector<std::string> positional;
  std::string out;
  bool paper_scale = false;
};

void add_common(CLI::App* sub, Invocation& inv) {
  sub->add_option("--config,-c", inv.config_path, "key = value config file");
  sub->add_option("--set,-s", inv.overrides, "override, key=value (repeatable)");
  sub->add_option("--out,-o", inv.out, "output directory");
  sub->add_flag("--paper-scale", inv.paper_scale, "use the paper-scale preset");
  sub->add_option("overrides", inv.positional, "further key=value overrides");
}

int run(const std::string& command, const Invocation& inv) {
  const std::string default_recipe = command == "simulate"           ? "fig4_critical"
                                     : command == "check-symmetries" ? "symmetries"
                                                                     : command;
  std::vector<std::string> overrides;
  overrides.push_back("run.workers=" + std::to_string(qwalk::workers_from_env()));
  if (inv.paper_scale) overrides.push_back("scale=paper");
  overrides.insert(overrides.end(), inv.overrides.begin(), inv.overrides.end());
  overrides.insert(overrides.end(), inv.positional.begin(), inv.positional.end());
  if (!inv.out.empty()) overrides.push_back("output.dir=" + inv.out);

  qwalk::ExperimentConfig config = qwalk::parse_config(inv.config_path, overrides, default_recipe);
  if (command != "simulate" && config.recipe != default_recipe) {
    throw qwalk::ConfigError("recipe", "subcommand '" + command + "' runs recipe '" +
                                           default_recipe + "', not '" + config.recipe + "'");
  }
  if (command == "simulate" && !config.recipe.starts_with("fig") && config.recipe != "sinai") {
    throw qwalk::ConfigError("recipe", "simulate runs fig* and sinai recipes; use the '" +
                                           config.recipe + "' subcommand instead");
  }

  std::cout << "# resolved config\n" << qwalk::format_config(config);
  std::cout << "# config_hash: " << qwalk::config_hash(config) << "\n" << std::flush;

  const qwalk::ExperimentReport report = qwalk::run_recipe(config);
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  }
  for (const auto& f : report.files) std::cout << "wrote " << config.output_dir << "/" << f << "\n";
  if (report.interrupted) {
    std::cout << "interrupted after run.stop_after; rerun with the same config to resume\n";
    return kInterrupted;
  }
  return report.passed() ? kPass : kAssertionFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disordered chiral quantum walk simulator"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "run a polarization (fig4_*, fig5_*) or sinai recipe"},
      {"dos", "density of states over a disorder ensemble"},
      {"dispersion", "clean-lattice spectrum against the band formula"},
      {"analytic", "tabulate the critical distribution or frequency propagator"},
      {"phase", "topological angle and phase of the configured disorder"},
      {"check-symmetries", "chiral and sublattice identities of one realization"},
      {"compare", "compare a finished polarization run with the critical prediction"},
  };
  std::vector<Invocation> invocations(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    add_common(app.add_subcommand(commands[i].first, commands[i].second), invocations[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!app.got_subcommand(commands[i].first)) continue;
    try {
      return run(commands[i].first, invocations[i]);
    } catch (const qwalk::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfigError;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kRuntimeError;
    }
  }
  return kConfigError;
}
