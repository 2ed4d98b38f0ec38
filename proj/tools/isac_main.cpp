#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "isac/experiment.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

isac::RunConfig load_or_default(const std::string& path) {
  if (path.empty()) return isac::RunConfig{};
  return isac::load_config(path);
}

void apply_overrides(isac::RunConfig& cfg, const CLI::App& cmd,
                     std::uint64_t seed, int trials) {
  if (cmd.count("--seed")) cfg.experiment.seed = seed;
  if (cmd.count("--trials")) cfg.experiment.trials = trials;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ISAC transceiver design experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int trials = 50;
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "run the configured experiment");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--seed", seed, "override the experiment seed");
  run->add_option("--trials", trials, "override the Monte Carlo trial count");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--threads", threads, "worker threads (0 = hardware)");

  CLI::App* dump = app.add_subcommand("dump-scenario",
                                      "serialize the realized scenario matrices");
  dump->add_option("--config", config_path, "experiment config file")->required();
  dump->add_option("--seed", seed, "override the experiment seed");
  dump->add_option("--out", out_dir, "output directory");

  CLI::App* verify = app.add_subcommand("verify", "run the oracle battery");
  verify->add_option("--config", config_path, "experiment config file");
  verify->add_option("--seed", seed, "override the experiment seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      isac::RunConfig cfg = isac::load_config(config_path);
      apply_overrides(cfg, *run, seed, trials);
      isac::ExperimentOutput out =
          isac::run_experiment(cfg, out_dir, threads, &std::cout);
      if (!out.rows.empty() && out.error_rows == static_cast<int>(out.rows.size())) {
        std::cerr << "every row failed; see the error column\n";
        return kExitSolver;
      }
      return 0;
    }
    if (dump->parsed()) {
      isac::RunConfig cfg = isac::load_config(config_path);
      apply_overrides(cfg, *dump, seed, trials);
      for (const auto& f : isac::dump_scenario_csv(cfg, out_dir))
        std::cout << f << "\n";
      return 0;
    }
    if (verify->parsed()) {
      isac::RunConfig cfg = load_or_default(config_path);
      apply_overrides(cfg, *verify, seed, trials);
      auto checks = isac::run_verify_battery(cfg, &std::cout);
      for (const auto& c : checks)
        if (!c.pass) return kExitSolver;
      return 0;
    }
  } catch (const isac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}
