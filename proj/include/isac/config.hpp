#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isac/bcd.hpp"
#include "isac/hybrid.hpp"
#include "isac/model.hpp"

namespace isac {

// Configuration or validation problem; the message carries the source name,
// line number and/or field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  convergence,
  power_sweep,
  rf_sweep,
  tradeoff_region,
  beampattern,
  verify
};

enum class SolverId { bcd_digital, bcd_hybrid, bd_digital, bd_hybrid, reference };

std::string to_string(ExperimentKind kind);
std::string to_string(SolverId solver);
ExperimentKind experiment_kind_from_string(const std::string& s);
SolverId solver_from_string(const std::string& s);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::convergence;
  int trials = 50;
  std::uint64_t seed = 1;
  double eta = 0.5;
  std::vector<SolverId> solvers = {SolverId::bcd_digital, SolverId::bd_digital};
  std::vector<double> pt_dbm_sweep = {20.0, 25.0, 30.0};
  std::vector<double> eta_sweep = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                   0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<int> rf_sweep = {10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  double angle_min_deg = -90.0;
  double angle_max_deg = 90.0;
  double angle_step_deg = 0.1;

  void validate() const;  // throws ConfigError naming the offending field
};

// Everything a run needs: the scenario template, the experiment plan and
// the solver knobs.
struct RunConfig {
  ScenarioGenConfig scenario;
  ExperimentSpec experiment;
  double bcd_tol = 1e-4;
  int bcd_max_iter = 100;
  HybridOptConfig hybrid;

  void validate() const;
};

/// Parses the sectioned key-value format. Unknown sections or keys are
/// rejected with their line numbers; type errors name the field path.
RunConfig parse_config(const std::string& text, const std::string& source_name);

RunConfig load_config(const std::string& path);

/// Canonical text form; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const RunConfig& cfg);

}  // namespace isac
