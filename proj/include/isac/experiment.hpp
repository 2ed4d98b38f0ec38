#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "isac/config.hpp"
#include "isac/oracle.hpp"

namespace isac {

// One line of results.csv. Sweep coordinates that do not apply to the
// experiment are left empty in the CSV.
struct ResultRow {
  std::string experiment;
  int trial = 0;
  std::string solver;
  double pt_dbm = 0.0;
  double eta = 0.0;
  int n_rf = -1;
  double wsr = 0.0;
  double scnr = 0.0;
  double objective = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;
  std::string error;
};

struct ExperimentOutput {
  std::vector<std::string> files;   // paths written under out_dir
  std::vector<ResultRow> rows;      // data rows (convergence uses trace rows)
  int error_rows = 0;
};

/// Executes the configured experiment and writes its CSV outputs into
/// out_dir. Trials run concurrently (threads == 0 picks the hardware
/// count); rows are emitted in deterministic trial order regardless of the
/// thread count.
ExperimentOutput run_experiment(const RunConfig& cfg, const std::string& out_dir,
                                int threads = 0, std::ostream* log = nullptr);

/// Serializes the realized scenario matrices (channels, target, clutters)
/// as CSV files with "re,im" cells.
std::vector<std::string> dump_scenario_csv(const RunConfig& cfg,
                                           const std::string& out_dir);

struct VerifyCheck {
  std::string name;
  double value = 0.0;      // measured
  double threshold = 0.0;  // pass when value <= threshold
  bool pass = false;
  std::string detail;
};

/// Oracle battery behind `isac verify`: gradient cross-check, scaling
/// equivalence, KKT/dual positivity, subspace residual of the reference
/// solver, water-filling vs. grid search, reduced-vs-full agreement.
std::vector<VerifyCheck> run_verify_battery(const RunConfig& cfg,
                                            std::ostream* log = nullptr);

/// Hybrid-factorized copy of a digital solution: precoders re-expressed as
/// analog/digital products with n_rf chains (and combiners with the
/// configured receive chains unless precoder_only).
DigitalSolution hybridize_solution(const Scenario& sc,
                                   const DigitalSolution& digital,
                                   const HybridOptConfig& hybrid_cfg, int n_rf,
                                   int n_rf_rx, bool precoder_only,
                                   const CMat* analog_init = nullptr);

}  // namespace isac
