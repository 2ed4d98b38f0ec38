#include "isac/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "isac/csv.hpp"

namespace isac {

namespace {

namespace fs = std::filesystem;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct TrialContext {
  const RunConfig& cfg;
  int trial;
  Rng root;  // everything for this trial derives from here

  TrialContext(const RunConfig& c, int t)
      : cfg(c), trial(t), root(Rng(c.experiment.seed).stream(t)) {}

  // The scenario depends only on (seed, trial); sweep coordinates override
  // deterministic fields so sweep points share their channel draws.
  Scenario scenario(double pt_dbm_override = std::nan("")) const {
    ScenarioGenConfig gen = cfg.scenario;
    if (!std::isnan(pt_dbm_override)) gen.pt_dbm = pt_dbm_override;
    return build_scenario(root.stream(0), gen);
  }

  BcdConfig bcd_config(int sweep_point) const {
    BcdConfig b;
    b.tol = cfg.bcd_tol;
    b.max_iter = cfg.bcd_max_iter;
    b.init_seed = root.stream(1000 + static_cast<std::uint64_t>(sweep_point)).seed();
    return b;
  }
};

ResultRow base_row(const RunConfig& cfg, int trial, SolverId solver) {
  ResultRow row;
  row.experiment = to_string(cfg.experiment.kind);
  row.trial = trial;
  row.solver = to_string(solver);
  row.eta = cfg.experiment.eta;
  row.pt_dbm = cfg.scenario.pt_dbm;
  return row;
}

void fill_metrics(ResultRow& row, const Scenario& sc,
                  const DigitalSolution& sol, const TradeoffWeights& weights) {
  row.wsr = weighted_sum_rate(sc, sol);
  row.scnr = scnr(sc, sol);
  row.objective = weights.rho_c() * row.wsr + weights.rho_s() * row.scnr;
  row.iterations = sol.iterations;
}

// Runs one solver on one sweep point, capturing failures into the row.
template <typename Fn>
ResultRow guarded(ResultRow row, Fn&& fn) {
  double t0 = now_ms();
  try {
    fn(row);
  } catch (const std::exception& e) {
    row.error = e.what();
    row.wsr = row.scnr = row.objective = 0.0;
  }
  row.wall_ms = now_ms() - t0;
  return row;
}

std::string csv_int_or_empty(int v) { return v < 0 ? "" : std::to_string(v); }

void write_result_header(std::ostream& os) {
  csv_row(os, {"experiment", "trial", "solver", "pt_dbm", "eta", "n_rf", "wsr",
               "scnr", "objective", "iterations", "wall_ms", "error"});
}

void write_result_row(std::ostream& os, const ResultRow& r) {
  csv_row(os, {r.experiment, std::to_string(r.trial), r.solver,
               csv_num(r.pt_dbm), csv_num(r.eta), csv_int_or_empty(r.n_rf),
               csv_num(r.wsr), csv_num(r.scnr), csv_num(r.objective),
               std::to_string(r.iterations), csv_num(r.wall_ms), r.error});
}

// Mean and sample standard deviation per (solver, sweep coordinate).
void write_summary(std::ostream& os, const std::vector<ResultRow>& rows) {
  struct Acc {
    int n = 0;
    double w = 0, w2 = 0, s = 0, s2 = 0, o = 0, o2 = 0;
  };
  std::map<std::string, Acc> groups;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    std::string key = r.solver + "," + csv_num(r.pt_dbm) + "," +
                      csv_num(r.eta) + "," + csv_int_or_empty(r.n_rf);
    Acc& a = groups[key];
    ++a.n;
    a.w += r.wsr;
    a.w2 += r.wsr * r.wsr;
    a.s += r.scnr;
    a.s2 += r.scnr * r.scnr;
    a.o += r.objective;
    a.o2 += r.objective * r.objective;
  }
  csv_row(os, {"solver", "pt_dbm", "eta", "n_rf", "trials", "wsr_mean",
               "wsr_std", "scnr_mean", "scnr_std", "objective_mean",
               "objective_std"});
  for (const auto& [key, a] : groups) {
    auto stats = [&](double sum, double sq) {
      double mean = sum / a.n;
      double var = a.n > 1 ? std::max(0.0, (sq - a.n * mean * mean) / (a.n - 1))
                           : 0.0;
      return std::make_pair(mean, std::sqrt(var));
    };
    auto [wm, ws] = stats(a.w, a.w2);
    auto [sm, ss] = stats(a.s, a.s2);
    auto [om, osd] = stats(a.o, a.o2);
    os << key << "," << a.n << "," << csv_num(wm) << "," << csv_num(ws) << ","
       << csv_num(sm) << "," << csv_num(ss) << "," << csv_num(om) << ","
       << csv_num(osd) << "\n";
  }
}

// --- per-kind trial execution -------------------------------------------

std::vector<BcdTraceRow> convergence_trace(const TrialContext& ctx,
                                           std::string* error) {
  const RunConfig& cfg = ctx.cfg;
  Scenario sc = ctx.scenario();
  BcdConfig bcd = ctx.bcd_config(0);
  std::vector<BcdTraceRow> trace;
  try {
    bcd.weights = calibrate_weights(sc, cfg.experiment.eta, bcd);
    solve_bcd(sc, bcd, nullptr, &trace);
  } catch (const std::exception& e) {
    *error = e.what();
  }
  return trace;
}

std::vector<ResultRow> run_power_sweep_trial(const TrialContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  std::vector<ResultRow> rows;
  const auto& sweep = cfg.experiment.pt_dbm_sweep;
  for (std::size_t p = 0; p < sweep.size(); ++p) {
    Scenario sc = ctx.scenario(sweep[p]);
    BcdConfig bcd = ctx.bcd_config(static_cast<int>(p));
    TradeoffWeights weights;
    std::string calib_error;
    try {
      weights = calibrate_weights(sc, cfg.experiment.eta, bcd);
    } catch (const std::exception& e) {
      calib_error = e.what();
    }
    bcd.weights = weights;

    std::optional<DigitalSolution> bcd_sol;
    for (SolverId solver : cfg.experiment.solvers) {
      ResultRow row = base_row(cfg, ctx.trial, solver);
      row.pt_dbm = sweep[p];
      row = guarded(std::move(row), [&](ResultRow& r) {
        if (!calib_error.empty()) throw std::runtime_error(calib_error);
        switch (solver) {
          case SolverId::bcd_digital: {
            bcd_sol = solve_bcd(sc, bcd);
            fill_metrics(r, sc, *bcd_sol, weights);
            break;
          }
          case SolverId::bcd_hybrid: {
            if (!bcd_sol) bcd_sol = solve_bcd(sc, bcd);
            DigitalSolution hyb = hybridize_solution(
                sc, *bcd_sol, cfg.hybrid, sc.dims.n_rf_tx, sc.dims.n_rf_rx,
                /*precoder_only=*/false);
            fill_metrics(r, sc, hyb, weights);
            r.iterations = bcd_sol->iterations;
            break;
          }
          case SolverId::bd_digital: {
            DigitalSolution sol = solve_bd(sc, weights);
            fill_metrics(r, sc, sol, weights);
            break;
          }
          case SolverId::bd_hybrid: {
            DigitalSolution sol = solve_bd(sc, weights);
            DigitalSolution hyb = hybridize_solution(
                sc, sol, cfg.hybrid, sc.dims.n_rf_tx, sc.dims.n_rf_rx,
                /*precoder_only=*/false);
            fill_metrics(r, sc, hyb, weights);
            break;
          }
          case SolverId::reference: {
            if (sc.dims.n_tx > 32)
              throw std::runtime_error(
                  "reference solver restricted to n_tx <= 32 (desk scale)");
            PgConfig pg;
            pg.init_seed = bcd.init_seed;
            DigitalSolution sol = projected_gradient_reference(sc, weights, pg);
            fill_metrics(r, sc, sol, weights);
            break;
          }
        }
      });
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ResultRow> run_rf_sweep_trial(const TrialContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  std::vector<ResultRow> rows;
  Scenario sc = ctx.scenario();
  BcdConfig bcd = ctx.bcd_config(0);
  TradeoffWeights weights = calibrate_weights(sc, cfg.experiment.eta, bcd);
  bcd.weights = weights;
  DigitalSolution digital = solve_bcd(sc, bcd);
  double digital_wsr = weighted_sum_rate(sc, digital);
  double digital_scnr = scnr(sc, digital);

  for (int n_rf : cfg.experiment.rf_sweep) {
    ResultRow drow = base_row(cfg, ctx.trial, SolverId::bcd_digital);
    drow.n_rf = n_rf;
    drow.wsr = digital_wsr;
    drow.scnr = digital_scnr;
    drow.objective = weights.rho_c() * digital_wsr + weights.rho_s() * digital_scnr;
    drow.iterations = digital.iterations;
    rows.push_back(drow);

    ResultRow row = base_row(cfg, ctx.trial, SolverId::bcd_hybrid);
    row.n_rf = n_rf;
    row = guarded(std::move(row), [&](ResultRow& r) {
      // Seed the analog stage with the steering construction whenever the
      // chain count admits an exact factorization of the relevant subspace.
      std::optional<CMat> analog;
      SubspaceBasis full = subspace_basis(sc);
      if (cfg.experiment.eta == 1.0) {
        SubspaceBasis comm = subspace_basis(sc, BasisSelection::comm_only);
        if (n_rf >= comm.r() && !comm.identity_fallback)
          analog = sufficient_rf_analog(comm, n_rf);
      }
      if (!analog && !full.identity_fallback && n_rf >= full.r())
        analog = sufficient_rf_analog(full, n_rf);
      if (!analog && !full.identity_fallback &&
          n_rf >= full.r() - full.clutter_cols)
        analog = sufficient_rf_analog(full, n_rf, /*clutter_nulled=*/true);
      DigitalSolution hyb = hybridize_solution(
          sc, digital, cfg.hybrid, n_rf, sc.dims.n_rf_rx,
          /*precoder_only=*/true, analog ? &*analog : nullptr);
      fill_metrics(r, sc, hyb, weights);
    });
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> run_tradeoff_trial(const TrialContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  std::vector<ResultRow> rows;
  Scenario sc = ctx.scenario();
  BcdConfig base = ctx.bcd_config(0);
  // One calibration per trial; every eta shares the same constants.
  TradeoffWeights calib = calibrate_weights(sc, 0.5, base);

  const auto& etas = cfg.experiment.eta_sweep;
  for (std::size_t p = 0; p < etas.size(); ++p) {
    TradeoffWeights weights{etas[p], calib.cons1, calib.cons2};
    BcdConfig bcd = ctx.bcd_config(static_cast<int>(p));
    bcd.weights = weights;
    for (SolverId solver : cfg.experiment.solvers) {
      if (solver != SolverId::bcd_digital && solver != SolverId::bd_digital)
        continue;  // tradeoff region is a digital-solver study
      ResultRow row = base_row(cfg, ctx.trial, solver);
      row.eta = etas[p];
      row = guarded(std::move(row), [&](ResultRow& r) {
        DigitalSolution sol = solver == SolverId::bcd_digital
                                  ? solve_bcd(sc, bcd)
                                  : solve_bd(sc, weights);
        fill_metrics(r, sc, sol, weights);
      });
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace

DigitalSolution hybridize_solution(const Scenario& sc,
                                   const DigitalSolution& digital,
                                   const HybridOptConfig& hybrid_cfg, int n_rf,
                                   int n_rf_rx, bool precoder_only,
                                   const CMat* analog_init) {
  HybridOptConfig cfg = hybrid_cfg;
  if (analog_init) cfg.analog_init = *analog_init;
  HybridFactors factors =
      factorize_hybrid(digital.precoders, n_rf, sc.power_budget, cfg);
  DigitalSolution out = digital;
  out.precoders = factors.composed();
  if (!precoder_only) {
    for (std::size_t k = 0; k < out.combiners.size(); ++k) {
      HybridFactors wf =
          factorize_combiner(digital.combiners[k], n_rf_rx, hybrid_cfg);
      out.combiners[k] = wf.composed()[0];
    }
  }
  return out;
}

ExperimentOutput run_experiment(const RunConfig& cfg, const std::string& out_dir,
                                int threads, std::ostream* log) {
  cfg.validate();
  const ExperimentSpec& spec = cfg.experiment;
  fs::create_directories(out_dir);
  ExperimentOutput output;

  if (spec.kind == ExperimentKind::verify) {
    auto checks = run_verify_battery(cfg, log);
    std::string path = (fs::path(out_dir) / "verify.csv").string();
    std::ofstream os(path);
    csv_row(os, {"check", "value", "threshold", "pass", "detail"});
    for (const auto& c : checks)
      csv_row(os, {c.name, csv_num(c.value), csv_num(c.threshold),
                   c.pass ? "1" : "0", c.detail});
    output.files.push_back(path);
    return output;
  }

  if (spec.kind == ExperimentKind::beampattern) {
    const Geometry& g = cfg.scenario.geometry;
    if (!g.ue_aod || !g.target_aod || (cfg.scenario.dims.n_clutter > 0 &&
                                       !g.clutter_aod))
      throw ConfigError(
          "validation: beampattern requires pinned 'ue_angles_deg', "
          "'target_angle_deg' and 'clutter_angles_deg'");
    TrialContext ctx(cfg, 0);
    Scenario sc = ctx.scenario();
    BcdConfig bcd = ctx.bcd_config(0);
    TradeoffWeights weights = calibrate_weights(sc, spec.eta, bcd);
    bcd.weights = weights;

    const double lo = spec.angle_min_deg, hi = spec.angle_max_deg,
                 st = spec.angle_step_deg;
    const int n = static_cast<int>(std::floor((hi - lo) / st)) + 1;
    RVec grid(n);
    for (int i = 0; i < n; ++i) grid[i] = (lo + i * st) * kDegToRad;

    auto emit = [&](const std::string& name, const DigitalSolution& sol) {
      std::string path =
          (fs::path(out_dir) / ("beampattern_" + name + ".csv")).string();
      std::ofstream os(path);
      csv_row(os, {"angle_deg", "user_index", "pattern_db"});
      auto write_pattern = [&](int user, const RVec& pat) {
        double peak = pat.maxCoeff();
        for (int i = 0; i < n; ++i) {
          double db = peak > 0.0 ? 10.0 * std::log10(std::max(pat[i] / peak, 1e-30))
                                 : -300.0;
          csv_row(os, {csv_num(lo + i * st), std::to_string(user), csv_num(db)});
        }
      };
      RVec overall = RVec::Zero(n);
      for (int k = 0; k < sc.dims.n_users; ++k) {
        RVec pat = transmit_beam_pattern(sol.precoders[k], grid);
        overall += pat;
        write_pattern(k, pat);
      }
      write_pattern(-1, overall);
      output.files.push_back(path);
    };

    DigitalSolution bcd_sol = solve_bcd(sc, bcd);
    emit("bcd-digital", bcd_sol);
    DigitalSolution bd_sol = solve_bd(sc, weights);
    emit("bd-digital", bd_sol);

    // Power allocation of the analytical solution.
    BdDecomposition dec = bd_decompose(sc);
    PowerAllocation alloc = allocate_power(
        weights.rho_c(), weights.rho_s(), sc.user_weights, dec.stream_gains,
        sc.noise_user, dec.d_coeff, dec.g_coeff, sc.power_budget);
    std::string ppath = (fs::path(out_dir) / "power_allocation.csv").string();
    std::ofstream pos(ppath);
    csv_row(pos, {"record", "user", "stream", "value"});
    for (std::size_t k = 0; k < alloc.comm_powers.size(); ++k)
      for (Eigen::Index i = 0; i < alloc.comm_powers[k].size(); ++i)
        csv_row(pos, {"comm", std::to_string(k), std::to_string(i),
                      csv_num(alloc.comm_powers[k][i])});
    for (std::size_t k = 0; k < alloc.sense_powers.size(); ++k)
      csv_row(pos, {"sense", std::to_string(k), "", csv_num(alloc.sense_powers[k])});
    csv_row(pos, {"mu", "", "", csv_num(alloc.water_level)});
    output.files.push_back(ppath);
    return output;
  }

  // Trial-parallel kinds: convergence, power-sweep, rf-sweep, tradeoff.
  const int trials = spec.trials;
  int n_threads = threads > 0 ? threads
                              : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, trials));

  std::vector<std::optional<std::vector<ResultRow>>> done(trials);
  std::vector<std::optional<std::vector<BcdTraceRow>>> traces;
  const bool is_convergence = spec.kind == ExperimentKind::convergence;
  if (is_convergence) traces.resize(trials);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<int> next_trial{0};

  auto worker = [&]() {
    for (;;) {
      int t = next_trial.fetch_add(1);
      if (t >= trials) return;
      TrialContext ctx(cfg, t);
      std::vector<ResultRow> rows;
      std::vector<BcdTraceRow> trace;
      try {
        switch (spec.kind) {
          case ExperimentKind::convergence: {
            std::string error;
            trace = convergence_trace(ctx, &error);
            ResultRow row = base_row(cfg, t, SolverId::bcd_digital);
            row.error = error;
            if (!trace.empty()) {
              row.iterations = static_cast<int>(trace.size());
              row.wsr = trace.back().wsr;
              row.scnr = trace.back().scnr;
              row.objective = trace.back().objective;
            }
            rows.push_back(row);
            break;
          }
          case ExperimentKind::power_sweep:
            rows = run_power_sweep_trial(ctx);
            break;
          case ExperimentKind::rf_sweep:
            rows = run_rf_sweep_trial(ctx);
            break;
          case ExperimentKind::tradeoff_region:
            rows = run_tradeoff_trial(ctx);
            break;
          default:
            break;
        }
      } catch (const std::exception& e) {
        ResultRow row = base_row(cfg, t, spec.solvers.front());
        row.error = e.what();
        rows = {row};
      }
      std::lock_guard<std::mutex> lock(mu);
      done[t] = std::move(rows);
      if (is_convergence) traces[t] = std::move(trace);
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);

  std::string results_path = (fs::path(out_dir) / "results.csv").string();
  std::ofstream results(results_path);
  write_result_header(results);
  std::ofstream trace_os;
  std::string trace_path;
  if (is_convergence) {
    trace_path = (fs::path(out_dir) / "trace.csv").string();
    trace_os.open(trace_path);
    csv_row(trace_os, {"experiment", "trial", "solver", "iteration",
                       "surrogate", "objective", "wsr", "scnr"});
  }

  // Flush trial outputs in order as they complete.
  for (int t = 0; t < trials; ++t) {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return done[t].has_value(); });
    std::vector<ResultRow> rows = std::move(*done[t]);
    std::optional<std::vector<BcdTraceRow>> trace;
    if (is_convergence) trace = std::move(traces[t]);
    lock.unlock();
    for (const auto& r : rows) {
      write_result_row(results, r);
      if (!r.error.empty()) ++output.error_rows;
      output.rows.push_back(r);
    }
    if (is_convergence && trace) {
      for (const auto& tr : *trace)
        csv_row(trace_os, {to_string(spec.kind), std::to_string(t),
                           "bcd-digital", std::to_string(tr.iteration),
                           csv_num(tr.surrogate), csv_num(tr.objective),
                           csv_num(tr.wsr), csv_num(tr.scnr)});
    }
    results.flush();
  }
  for (auto& th : pool) th.join();

  output.files.push_back(results_path);
  if (is_convergence) output.files.push_back(trace_path);

  std::string summary_path = (fs::path(out_dir) / "summary.csv").string();
  std::ofstream summary(summary_path);
  write_summary(summary, output.rows);
  output.files.push_back(summary_path);

  if (log) {
    *log << "wrote:";
    for (const auto& f : output.files) *log << ' ' << f;
    *log << '\n';
  }
  return output;
}

std::vector<std::string> dump_scenario_csv(const RunConfig& cfg,
                                           const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  TrialContext ctx(cfg, 0);
  Scenario sc = ctx.scenario();
  std::vector<std::string> files;
  auto dump = [&](const std::string& name, const CMat& m) {
    std::string path = (fs::path(out_dir) / (name + ".csv")).string();
    std::ofstream os(path);
    write_complex_matrix_csv(os, m);
    files.push_back(path);
  };
  for (int k = 0; k < sc.dims.n_users; ++k)
    dump("channel_user" + std::to_string(k), sc.channels[k]);
  dump("target", sc.target);
  for (int i = 0; i < sc.dims.n_clutter; ++i)
    dump("clutter" + std::to_string(i), sc.clutters[i]);
  return files;
}

std::vector<VerifyCheck> run_verify_battery(const RunConfig& cfg,
                                            std::ostream* log) {
  std::vector<VerifyCheck> checks;
  auto record = [&](std::string name, double value, double threshold,
                    std::string detail = "") {
    VerifyCheck c{std::move(name), value, threshold, value <= threshold,
                  std::move(detail)};
    if (log)
      *log << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.value
           << " (<= " << c.threshold << (c.detail.empty() ? ")" : ") " + c.detail)
           << "\n";
    checks.push_back(std::move(c));
  };

  // Desk-scale template shared by the oracle checks.
  ScenarioGenConfig small = cfg.scenario;
  small.dims.n_tx = 16;
  small.dims.n_rx = 2;
  small.dims.n_streams = 1;
  small.dims.n_users = 2;
  small.dims.n_rf_tx = 4;
  small.dims.n_rf_rx = 1;
  small.dims.n_sensor = 6;
  small.dims.n_clutter = 1;
  small.chan.n_paths_per_user = 2;

  const std::uint64_t seed = cfg.experiment.seed;

  // 1. Analytic gradients vs central finite differences.
  {
    double worst = 0.0;
    for (int inst = 0; inst < 10; ++inst) {
      Rng rng = Rng(seed).stream(200 + inst);
      ScenarioGenConfig g8 = small;
      g8.dims.n_tx = 8;
      g8.dims.n_rf_tx = 2;
      Scenario sc = build_scenario(rng, g8);
      TradeoffWeights w{0.5, 1.0, 1.0};
      BcdConfig bc;
      bc.weights = w;
      bc.max_iter = 3;
      bc.init_seed = rng.seed();
      DigitalSolution sol = solve_bcd(sc, bc);
      auto grads = analytic_gradients(sc, sol, w);
      for (int k = 0; k < sc.dims.n_users; ++k) {
        CMat fd = fd_gradient(sc, sol, w, k, 1e-6 * std::sqrt(sc.power_budget));
        double rel = (grads[k] - fd).norm() / std::max(fd.norm(), 1e-300);
        worst = std::max(worst, rel);
      }
    }
    record("gradient-vs-finite-difference", worst, 1e-5);
  }

  // 2. Scaling equivalence (normalized unconstrained run vs constrained value).
  {
    double worst = 0.0, worst_alpha = 0.0;
    for (int inst = 0; inst < 5; ++inst) {
      Scenario sc = build_scenario(Rng(seed).stream(300 + inst), small);
      TradeoffWeights w{0.6, 1.0, 1.0};
      ScalingReport rep = scaling_equivalence_check(sc, w, seed + inst);
      double denom = std::max(1.0, std::abs(rep.unconstrained_value));
      worst = std::max(worst,
                       std::abs(rep.constrained_value - rep.unconstrained_value) /
                           denom);
      worst_alpha = std::max(worst_alpha, std::abs(rep.alpha - rep.alpha_formula));
    }
    record("scaling-equivalence-objective", worst, 1e-6);
    record("scaling-alpha-formula", worst_alpha, 1e-10);
  }

  // 3. Reference solver: KKT residual, dual positivity, subspace residual.
  {
    double worst_res = 0.0, worst_proj = 0.0;
    double min_lambda = std::numeric_limits<double>::infinity();
    for (int inst = 0; inst < 5; ++inst) {
      Scenario sc = build_scenario(Rng(seed).stream(400 + inst), small);
      TradeoffWeights w{0.5, 1.0, 1.0};
      PgConfig pg;
      pg.init_seed = seed + inst;
      DigitalSolution sol = projected_gradient_reference(sc, w, pg);
      KktReport rep = kkt_report(sc, sol, w);
      if (rep.is_trivial_point) continue;
      worst_res = std::max(
          worst_res, rep.stationarity_residual / std::max(rep.gradient_scale, 1e-300));
      min_lambda = std::min(min_lambda, rep.dual_lambda);
      SubspaceBasis basis = subspace_basis(sc);
      CMat fcat(sc.dims.n_tx, sc.dims.n_users * sc.dims.n_streams);
      for (int k = 0; k < sc.dims.n_users; ++k)
        fcat.middleCols(k * sc.dims.n_streams, sc.dims.n_streams) =
            sol.precoders[k];
      worst_proj = std::max(worst_proj, projection_residual(basis.basis, fcat));
    }
    record("reference-kkt-residual", worst_res, 1e-3);
    record("reference-subspace-residual", worst_proj, 1e-3);
    record("reference-dual-positive", min_lambda > 0.0 ? 0.0 : 1.0, 0.0,
           "lambda_min=" + csv_num(min_lambda));
  }

  // 4. Water-filling vs grid oracle.
  {
    double worst = 0.0, worst_power = 0.0;
    Rng rng(seed ^ 0x5a5a);
    for (int inst = 0; inst < 6; ++inst) {
      PowerProblem prob;
      int streams = 1 + inst % 3;  // 2..4 variables incl. sensing
      prob.user_weights = {1.0};
      prob.stream_gains = {RVec::Zero(streams)};
      prob.noises = {0.5 + rng.uniform()};
      prob.d_coeff = {RVec::Zero(streams)};
      for (int i = 0; i < streams; ++i) {
        prob.stream_gains[0][i] = 0.5 + rng.uniform();
        prob.d_coeff[0][i] = 0.2 * rng.uniform();
      }
      prob.g_coeff = inst % 2 ? 0.0 : 0.3 + 0.3 * rng.uniform();
      prob.rho_c = 1.0;
      prob.rho_s = inst % 3 ? 0.8 : 0.0;
      if (prob.rho_s == 0.0) prob.g_coeff = 0.0;
      prob.power_budget = 2.0;
      PowerAllocation wf = allocate_power(
          prob.rho_c, prob.rho_s, prob.user_weights, prob.stream_gains,
          prob.noises, prob.d_coeff, prob.g_coeff, prob.power_budget);
      double wf_obj = power_objective(prob.rho_c, prob.rho_s, prob.user_weights,
                                      prob.stream_gains, prob.noises,
                                      prob.d_coeff, prob.g_coeff, wf);
      GridOracleResult grid = waterfilling_grid_oracle(prob);
      worst = std::max(worst, std::abs(wf_obj - grid.objective));
      worst_power =
          std::max(worst_power, std::abs(wf.total() - prob.power_budget));
    }
    record("waterfilling-vs-grid-objective", worst, 1e-4);
    record("waterfilling-power-budget", worst_power, 1e-8);
  }

  // 5. Reduced vs full-dimensional block updates.
  {
    Scenario sc = build_scenario(Rng(seed).stream(500), small);
    TradeoffWeights w{0.5, 1.0, 1.0};
    BcdConfig bc;
    bc.weights = w;
    bc.max_iter = 25;
    bc.tol = 1e-300;
    bc.init_seed = seed;
    DigitalSolution reduced = solve_bcd(sc, bc);

    SubspaceBasis identity;
    identity.basis = CMat::Identity(sc.dims.n_tx, sc.dims.n_tx);
    identity.identity_fallback = true;
    ReducedState full = reduce_scenario(sc, identity);
    init_bcd_state(full, sc, identity, bc);
    // Same starting precoder: map the reduced init through V.
    SubspaceBasis basis = subspace_basis(sc);
    ReducedState rstate = reduce_scenario(sc, basis);
    init_bcd_state(rstate, sc, basis, bc);
    for (int k = 0; k < sc.dims.n_users; ++k)
      full.x[k] = basis.basis * rstate.x[k];
    for (int k = 0; k < sc.dims.n_users; ++k)
      full.aux_u.segment(k * sc.dims.n_streams, sc.dims.n_streams) =
          update_auxiliary_u(full, sc, k);
    DigitalSolution fullsol = solve_bcd(sc, bc, &full, nullptr, &identity);
    double diff = std::abs(reduced.objective_trace.back() -
                           fullsol.objective_trace.back()) /
                  std::max(1.0, std::abs(fullsol.objective_trace.back()));
    record("reduced-vs-full-objective", diff, 1e-6);
  }

  return checks;
}

}  // namespace isac
