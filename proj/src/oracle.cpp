#include "isac/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "isac/rng.hpp"

namespace isac {

namespace {

constexpr double kLn2 = 0.6931471805599453;

CMat hpd_inverse(const CMat& m, const char* what) {
  Eigen::LDLT<CMat> fac(hermitize(m));
  CMat inv = fac.solve(CMat::Identity(m.rows(), m.cols()));
  if (fac.info() != Eigen::Success || !inv.allFinite())
    throw std::runtime_error(std::string(what) + " is singular");
  return inv;
}

double stacked_power(const std::vector<CMat>& fs) {
  double p = 0.0;
  for (const auto& f : fs) p += f.squaredNorm();
  return p;
}

// MMSE combiners and the SCNR-optimal radar beamformer for a fixed F.
void attach_optimal_receivers(const Scenario& sc, DigitalSolution& sol) {
  const auto& d = sc.dims;
  sol.combiners.resize(d.n_users);
  for (int k = 0; k < d.n_users; ++k) {
    CMat cov = sc.noise_user[k] * CMat::Identity(d.n_rx, d.n_rx);
    for (const auto& f : sol.precoders) {
      CMat hf = sc.channels[k] * f;
      cov += hf * hf.adjoint();
    }
    sol.combiners[k] = cov.ldlt().solve(sc.channels[k] * sol.precoders[k]);
  }
  CMat num = CMat::Zero(d.n_sensor, d.n_sensor);
  CMat den = sc.noise_radar * CMat::Identity(d.n_sensor, d.n_sensor);
  for (const auto& f : sol.precoders) {
    CMat af = sc.target * f;
    num += af * af.adjoint();
    for (const auto& b : sc.clutters) {
      CMat bf = b * f;
      den += bf * bf.adjoint();
    }
  }
  sol.radar_beamformer = dominant_generalized_eigvec(num, den);
}

}  // namespace

std::vector<CMat> analytic_gradients(const Scenario& sc,
                                     const DigitalSolution& sol,
                                     const TradeoffWeights& weights) {
  const auto& d = sc.dims;
  const int K = d.n_users;
  const double rho_c = weights.rho_c();
  const double rho_s = weights.rho_s();

  // Per-user receive-side quantities shared across all F_k gradients.
  std::vector<CMat> wh(K), z_inv(K), zt_inv(K);
  for (int i = 0; i < K; ++i) {
    wh[i] = sol.combiners[i].adjoint() * sc.channels[i];  // Ns x Nt
    CMat zt = sc.noise_user[i] * (sol.combiners[i].adjoint() * sol.combiners[i]);
    for (int j = 0; j < K; ++j) {
      if (j == i) continue;
      CMat t = wh[i] * sol.precoders[j];
      zt += t * t.adjoint();
    }
    CMat sig = wh[i] * sol.precoders[i];
    CMat z = zt + sig * sig.adjoint();
    z_inv[i] = hpd_inverse(z, "Z_i");
    zt_inv[i] = hpd_inverse(zt, "Ztilde_i");
  }

  const CVec& w = sol.radar_beamformer;
  const CVec aw = sc.target.adjoint() * w;  // A^H w
  std::vector<CVec> bw;
  bw.reserve(sc.clutters.size());
  for (const auto& b : sc.clutters) bw.push_back(b.adjoint() * w);

  double f1 = 0.0;
  double f2 = sc.noise_radar * w.squaredNorm();
  for (const auto& f : sol.precoders) {
    f1 += (f.adjoint() * aw).squaredNorm();
    for (const auto& v : bw) f2 += (f.adjoint() * v).squaredNorm();
  }

  std::vector<CMat> grads(K);
  for (int k = 0; k < K; ++k) {
    CMat g = CMat::Zero(d.n_tx, d.n_streams);
    if (rho_c > 0.0) {
      g += (rho_c * sc.user_weights[k] / kLn2) *
           (wh[k].adjoint() * (z_inv[k] * (wh[k] * sol.precoders[k])));
      for (int i = 0; i < K; ++i) {
        if (i == k) continue;
        g += (rho_c * sc.user_weights[i] / kLn2) *
             (wh[i].adjoint() *
              ((z_inv[i] - zt_inv[i]) * (wh[i] * sol.precoders[k])));
      }
    }
    if (rho_s > 0.0) {
      CMat gs = (1.0 / f2) * (aw * (aw.adjoint() * sol.precoders[k]));
      for (const auto& v : bw)
        gs -= (f1 / (f2 * f2)) * (v * (v.adjoint() * sol.precoders[k]));
      g += rho_s * gs;
    }
    grads[k] = std::move(g);
  }
  return grads;
}

CMat fd_gradient(const Scenario& sc, const DigitalSolution& sol,
                 const TradeoffWeights& weights, int k, double h) {
  DigitalSolution probe = sol;
  CMat g(sol.precoders.at(k).rows(), sol.precoders[k].cols());
  auto eval = [&]() { return isac_objective(sc, probe, weights); };
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      Complex orig = probe.precoders[k](r, c);
      probe.precoders[k](r, c) = orig + h;
      double fp = eval();
      probe.precoders[k](r, c) = orig - h;
      double fm = eval();
      double dre = (fp - fm) / (2.0 * h);
      probe.precoders[k](r, c) = orig + kImag * h;
      fp = eval();
      probe.precoders[k](r, c) = orig - kImag * h;
      fm = eval();
      double dim = (fp - fm) / (2.0 * h);
      probe.precoders[k](r, c) = orig;
      // d/dRe = 2 Re(grad), d/dIm = 2 Im(grad) in this convention.
      g(r, c) = 0.5 * Complex(dre, dim);
    }
  }
  return g;
}

KktReport kkt_report(const Scenario& sc, const DigitalSolution& sol,
                     const TradeoffWeights& weights) {
  KktReport rep;
  std::vector<CMat> grads = analytic_gradients(sc, sol, weights);
  double num = 0.0, den = 0.0, gnorm2 = 0.0;
  for (std::size_t k = 0; k < grads.size(); ++k) {
    num += (sol.precoders[k].adjoint() * grads[k]).real().trace();
    den += sol.precoders[k].squaredNorm();
    gnorm2 += grads[k].squaredNorm();
  }
  rep.dual_lambda = den > 0.0 ? num / den : 0.0;
  double res2 = 0.0;
  for (std::size_t k = 0; k < grads.size(); ++k)
    res2 += (grads[k] - rep.dual_lambda * sol.precoders[k]).squaredNorm();
  rep.stationarity_residual = std::sqrt(res2);
  rep.gradient_scale = std::sqrt(gnorm2);
  rep.power_slack = sc.power_budget - stacked_power(sol.precoders);

  rep.is_trivial_point = true;
  for (int k = 0; k < sc.dims.n_users; ++k) {
    const CMat& f = sol.precoders[k];
    double scale_h = sc.channels[k].norm() * f.norm();
    double scale_a = sc.target.norm() * f.norm();
    if ((sc.channels[k] * f).norm() > 1e-9 * scale_h ||
        (sc.target * f).norm() > 1e-9 * scale_a) {
      rep.is_trivial_point = false;
      break;
    }
  }
  return rep;
}

DigitalSolution projected_gradient_reference(const Scenario& sc,
                                             const TradeoffWeights& weights,
                                             const PgConfig& cfg) {
  sc.validate();
  const auto& d = sc.dims;
  const int K = d.n_users;

  DigitalSolution cur;
  cur.precoders.resize(K);
  Rng rng(cfg.init_seed);
  for (int k = 0; k < K; ++k) {
    cur.precoders[k].resize(d.n_tx, d.n_streams);
    Rng s = rng.stream(static_cast<std::uint64_t>(k));
    for (int i = 0; i < d.n_tx; ++i)
      for (int j = 0; j < d.n_streams; ++j)
        cur.precoders[k](i, j) = s.cnormal(1.0);
  }
  double scale = std::sqrt(sc.power_budget / stacked_power(cur.precoders));
  for (auto& f : cur.precoders) f *= scale;
  attach_optimal_receivers(sc, cur);

  auto project = [&](std::vector<CMat>& fs) {
    double p = stacked_power(fs);
    if (p > sc.power_budget) {
      double c = std::sqrt(sc.power_budget / p);
      for (auto& f : fs) f *= c;
    }
  };

  double merit = isac_objective(sc, cur, weights);
  if (!std::isfinite(merit))
    throw std::runtime_error("projected_gradient_reference: non-finite objective");
  cur.objective_trace.push_back(merit);
  DigitalSolution best = cur;
  double best_merit = merit;
  double step = cfg.init_step;

  for (int it = 0; it < cfg.max_iter; ++it) {
    cur.iterations = it + 1;
    std::vector<CMat> g = analytic_gradients(sc, cur, weights);
    double g2 = 0.0;
    for (const auto& gk : g) g2 += gk.squaredNorm();
    if (!(g2 > 0.0)) break;
    // Keep the first trial move at a fixed fraction of the feasible ball.
    double step_cap = 0.4 * std::sqrt(sc.power_budget / g2);
    double t = std::min(step, step_cap);

    bool accepted = false;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
      DigitalSolution cand = cur;
      for (int k = 0; k < K; ++k) cand.precoders[k] += t * g[k];
      project(cand.precoders);
      attach_optimal_receivers(sc, cand);
      double cand_merit = isac_objective(sc, cand, weights);
      double moved = 0.0;
      for (int k = 0; k < K; ++k)
        moved += 2.0 * ((cand.precoders[k] - cur.precoders[k]).adjoint() * g[k])
                           .real()
                           .trace();
      if (std::isfinite(cand_merit) &&
          cand_merit >= merit + 1e-4 * std::max(moved, 0.0) &&
          cand_merit >= merit) {
        cand.objective_trace = cur.objective_trace;
        cand.iterations = cur.iterations;
        cur = std::move(cand);
        merit = cand_merit;
        accepted = true;
        step = std::min(t * 2.0, 1e6);
        break;
      }
      t *= cfg.shrink;
    }
    cur.objective_trace.push_back(merit);
    if (merit > best_merit) {
      best_merit = merit;
      best = cur;
    }
    if (!accepted) break;  // no ascent direction left at line-search scale
  }
  best.converged = true;
  return best;
}

ScalingReport scaling_equivalence_check(const Scenario& sc,
                                        const TradeoffWeights& weights,
                                        std::uint64_t seed, int sweeps) {
  BcdConfig cfg;
  cfg.weights = weights;
  cfg.random_init = true;  // generic interior point per seed
  cfg.init_seed = seed;
  cfg.max_iter = sweeps;
  cfg.tol = 1e-300;  // run the full sweep budget; we want an interior iterate

  SubspaceBasis basis = subspace_basis(sc);
  ReducedState state = reduce_scenario(sc, basis);
  init_bcd_state(state, sc, basis, cfg);
  const int ns = sc.dims.n_streams;
  for (int t = 0; t < sweeps; ++t) {
    if (state.aux_u.squaredNorm() > 0.0)
      state.radar_w = update_radar_beamformer(state, sc);
    for (int k = 0; k < sc.dims.n_users; ++k)
      state.combiners[k] = update_combiner(state, sc, k);
    for (int k = 0; k < sc.dims.n_users; ++k)
      state.weight_mats[k] = update_weight_matrix(state, k);
    state.x = update_reduced_precoders(state, sc, cfg.weights);
    for (int k = 0; k < sc.dims.n_users; ++k)
      state.aux_u.segment(static_cast<Eigen::Index>(k) * ns, ns) =
          update_auxiliary_u(state, sc, k);
  }

  ScalingReport rep;
  rep.unconstrained_value = reduced_objective(state, sc, weights);
  rep.alpha_formula = std::sqrt(sc.power_budget / state.power_trace());

  DigitalSolution sol;
  sol.precoders = normalize_precoder(state, basis, sc);
  sol.combiners = state.combiners;
  sol.radar_beamformer = state.radar_w;
  rep.constrained_value = isac_objective(sc, sol, weights);

  double raw = 0.0;
  for (const auto& x : state.x) raw += (basis.basis * x).squaredNorm();
  rep.alpha = std::sqrt(stacked_power(sol.precoders) / raw);
  return rep;
}

int PowerProblem::n_vars() const {
  int n = 1;  // aggregated sensing power
  for (const auto& g : stream_gains) n += static_cast<int>(g.size());
  return n;
}

GridOracleResult waterfilling_grid_oracle(const PowerProblem& prob,
                                          int resolution, int passes) {
  const int n = prob.n_vars();
  const double pt = prob.power_budget;
  const std::size_t K = prob.stream_gains.size();

  auto evaluate = [&](const RVec& vars) {
    PowerAllocation a;
    a.comm_powers.resize(K);
    Eigen::Index at = 0;
    for (std::size_t k = 0; k < K; ++k) {
      a.comm_powers[k] = vars.segment(at, prob.stream_gains[k].size());
      at += prob.stream_gains[k].size();
    }
    a.sense_powers.assign(K, vars[n - 1] / static_cast<double>(K));
    double obj = power_objective(prob.rho_c, prob.rho_s, prob.user_weights,
                                 prob.stream_gains, prob.noises, prob.d_coeff,
                                 prob.g_coeff, a);
    return std::make_pair(obj, a);
  };

  RVec lo = RVec::Zero(n), hi = RVec::Constant(n, pt);
  RVec best_vars = RVec::Zero(n);
  best_vars[n - 1] = pt;
  double best_obj = -std::numeric_limits<double>::infinity();
  PowerAllocation best_alloc;

  for (int pass = 0; pass < passes; ++pass) {
    RVec vars(n);
    // Recursive sweep of the first n-1 coordinates; the last coordinate
    // takes the remaining budget when it fits its window.
    std::function<void(int, double)> sweep = [&](int idx, double used) {
      if (idx == n - 1) {
        double rest = pt - used;
        if (rest < lo[idx] - 1e-12 * pt || rest > hi[idx] + 1e-12 * pt) return;
        vars[idx] = std::max(0.0, rest);
        auto [obj, a] = evaluate(vars);
        if (obj > best_obj) {
          best_obj = obj;
          best_vars = vars;
          best_alloc = a;
        }
        return;
      }
      for (int s = 0; s <= resolution; ++s) {
        double v = lo[idx] + (hi[idx] - lo[idx]) * s / resolution;
        if (used + v > pt + 1e-12 * pt) break;
        vars[idx] = v;
        sweep(idx + 1, used + v);
      }
    };
    sweep(0, 0.0);

    // Shrink every window around the incumbent.
    for (int i = 0; i < n; ++i) {
      double span = (hi[i] - lo[i]) * 2.0 / resolution;
      lo[i] = std::max(0.0, best_vars[i] - span);
      hi[i] = std::min(pt, best_vars[i] + span);
    }
  }
  return {best_alloc, best_obj};
}

}  // namespace isac
