#include "isac/bcd.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace isac {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// sum_k tr(Htilde X_k X_k^H), the power of the implied precoder V X.
double power_trace_of(const CMat& gram, const std::vector<CMat>& xs) {
  double t = 0.0;
  for (const auto& x : xs) t += (x.adjoint() * gram * x).real().trace();
  return t;
}

// f2(X, w): clutter-plus-noise quadratic form of the quadratic transform.
double f2_value(const ReducedState& st, const Scenario& sc, const CVec& w,
                const CMat& xcat, double tr_sum) {
  double v = (sc.noise_radar / sc.power_budget) * tr_sum * w.squaredNorm();
  for (const auto& bbar : st.reduced_clutters)
    v += (xcat.adjoint() * (bbar.adjoint() * w)).squaredNorm();
  return v;
}

}  // namespace

CMat ReducedState::x_cat() const {
  const int ns = x.empty() ? 0 : static_cast<int>(x[0].cols());
  CMat cat(r(), static_cast<Eigen::Index>(x.size()) * ns);
  for (std::size_t k = 0; k < x.size(); ++k)
    cat.middleCols(static_cast<Eigen::Index>(k) * ns, ns) = x[k];
  return cat;
}

double ReducedState::power_trace() const { return power_trace_of(gram, x); }

SubspaceBasis subspace_basis(const Scenario& sc, BasisSelection sel) {
  const int nt = sc.dims.n_tx;
  std::vector<double> aods;
  const bool comm = sel != BasisSelection::sensing_only;
  const bool target = sel != BasisSelection::comm_only;
  const bool clutter =
      sel == BasisSelection::all || sel == BasisSelection::sensing_only;
  SubspaceBasis b;
  if (comm)
    for (const auto& paths : sc.user_paths)
      for (const auto& p : paths) aods.push_back(p.aod);
  b.comm_cols = static_cast<int>(aods.size());
  if (target) aods.push_back(sc.target_aod);
  b.target_cols = static_cast<int>(aods.size()) - b.comm_cols;
  if (clutter)
    for (double a : sc.clutter_aod) aods.push_back(a);
  b.clutter_cols =
      static_cast<int>(aods.size()) - b.comm_cols - b.target_cols;

  if (static_cast<int>(aods.size()) > nt) {
    b.basis = CMat::Identity(nt, nt);
    b.identity_fallback = true;
    b.comm_cols = b.target_cols = b.clutter_cols = 0;
    return b;
  }
  b.basis.resize(nt, static_cast<Eigen::Index>(aods.size()));
  for (std::size_t j = 0; j < aods.size(); ++j)
    b.basis.col(static_cast<Eigen::Index>(j)) = steering_vector(nt, aods[j]);
  return b;
}

ReducedState reduce_scenario(const Scenario& sc, const SubspaceBasis& basis) {
  ReducedState st;
  const CMat& v = basis.basis;
  st.reduced_channels.reserve(sc.channels.size());
  for (const auto& h : sc.channels) st.reduced_channels.push_back(h * v);
  st.reduced_target = sc.target * v;
  st.reduced_clutters.reserve(sc.clutters.size());
  for (const auto& b : sc.clutters) st.reduced_clutters.push_back(b * v);
  st.gram = hermitize(v.adjoint() * v);
  return st;
}

void init_bcd_state(ReducedState& state, const Scenario& sc,
                    const SubspaceBasis& basis, const BcdConfig& config) {
  const auto& d = sc.dims;
  const int K = d.n_users;
  const int ns = d.n_streams;
  const int r = state.r();

  state.x.assign(K, CMat::Zero(r, ns));
  if (config.random_init) {
    Rng root(config.init_seed);
    for (int k = 0; k < K; ++k) {
      Rng stream = root.stream(static_cast<std::uint64_t>(k));
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < ns; ++j) state.x[k](i, j) = stream.cnormal(1.0);
    }
  } else {
    // Eigen-beams toward each user; the target steering direction rides on
    // the user whose signal space is best aligned with it, which settles
    // the sensing assignment up front.
    Eigen::LDLT<CMat> gram_fac(state.gram);
    const CVec at = steering_vector(d.n_tx, sc.target_aod);
    const double per_user = sc.power_budget / K;
    int best = 0;
    double best_align = -1.0;
    for (int k = 0; k < K; ++k) {
      Eigen::JacobiSVD<CMat> svd(sc.channels[k], Eigen::ComputeThinV);
      const int cols =
          std::min<int>(ns, static_cast<int>(svd.matrixV().cols()));
      CMat f = CMat::Zero(d.n_tx, ns);
      f.leftCols(cols) =
          svd.matrixV().leftCols(cols) * std::sqrt(per_user / ns);
      double align = (svd.matrixV().leftCols(cols).adjoint() * at).norm();
      if (align > best_align) {
        best_align = align;
        best = k;
      }
      state.x[k] = gram_fac.solve(basis.basis.adjoint() * f);
    }
    CVec xt = gram_fac.solve(basis.basis.adjoint() * at);
    double xt_power = (xt.adjoint() * state.gram * xt)(0).real();
    if (xt_power > 0.0)
      state.x[best].col(0) +=
          std::sqrt(config.init_sense_fraction * sc.power_budget / xt_power) *
          xt;
  }
  double tr = power_trace_of(state.gram, state.x);
  if (!(tr > 0.0)) throw std::runtime_error("init_bcd_state: zero initial X");
  double scale = std::sqrt(sc.power_budget / tr);
  for (auto& x : state.x) x *= scale;

  CMat w0 = CMat::Zero(d.n_rx, ns);
  w0.topRows(ns) = CMat::Identity(ns, ns);
  state.combiners.assign(K, w0);
  state.weight_mats.assign(K, CMat::Identity(ns, ns));
  state.radar_w = steering_vector(d.n_sensor, sc.target_aoa);

  state.aux_u = CVec::Zero(static_cast<Eigen::Index>(K) * ns);
  for (int k = 0; k < K; ++k)
    state.aux_u.segment(static_cast<Eigen::Index>(k) * ns, ns) =
        update_auxiliary_u(state, sc, k);
}

CVec update_radar_beamformer(const ReducedState& state, const Scenario& sc) {
  double unorm2 = state.aux_u.squaredNorm();
  if (!(unorm2 > 0.0))
    throw std::runtime_error(
        "update_radar_beamformer: auxiliary u is zero; reinitialize u");
  const CMat xcat = state.x_cat();
  double tr_sum = state.power_trace();
  const int nsen = sc.dims.n_sensor;

  CMat d = (sc.noise_radar / sc.power_budget) * tr_sum *
           CMat::Identity(nsen, nsen);
  for (const auto& bbar : state.reduced_clutters) {
    CMat bx = bbar * xcat;
    d += bx * bx.adjoint();
  }
  CVec rhs = state.reduced_target * (xcat * state.aux_u);
  return d.ldlt().solve(rhs) / unorm2;
}

CMat update_combiner(const ReducedState& state, const Scenario& sc, int k) {
  const CMat& hbar = state.reduced_channels.at(k);
  double tr_sum = state.power_trace();
  const int nr = sc.dims.n_rx;

  CMat m = (sc.noise_user.at(k) / sc.power_budget) * tr_sum *
           CMat::Identity(nr, nr);
  for (const auto& x : state.x) {
    CMat hx = hbar * x;
    m += hx * hx.adjoint();
  }
  return m.ldlt().solve(hbar * state.x[k]);
}

CMat update_weight_matrix(const ReducedState& state, int k) {
  const int ns = static_cast<int>(state.x.at(k).cols());
  CMat t = CMat::Identity(ns, ns) -
           state.combiners.at(k).adjoint() * state.reduced_channels.at(k) *
               state.x[k];
  Eigen::FullPivLU<CMat> lu(t);
  if (!lu.isInvertible())
    throw std::runtime_error(
        "update_weight_matrix: I - W^H Hbar X singular; perturb X_k");
  return hermitize(lu.inverse());
}

std::vector<CMat> update_reduced_precoders(const ReducedState& state,
                                           const Scenario& sc,
                                           const TradeoffWeights& weights) {
  const int K = sc.dims.n_users;
  const int r = state.r();
  const double rho_c = weights.rho_c();
  const double rho_s = weights.rho_s();
  const double unorm2 = state.aux_u.squaredNorm();
  const double wnorm2 = state.radar_w.squaredNorm();
  const int ns = sc.dims.n_streams;

  CMat s = CMat::Zero(r, r);
  double gram_coeff = 0.0;
  for (int i = 0; i < K; ++i) {
    const CMat wh = state.combiners[i].adjoint() * state.reduced_channels[i];
    s += (rho_c * sc.user_weights[i]) *
         (wh.adjoint() * state.weight_mats[i] * wh);
    gram_coeff += rho_c * sc.user_weights[i] * sc.noise_user[i] /
                  sc.power_budget *
                  (state.weight_mats[i] * state.combiners[i].adjoint() *
                   state.combiners[i])
                      .real()
                      .trace();
  }
  for (const auto& bbar : state.reduced_clutters) {
    CVec bw = bbar.adjoint() * state.radar_w;
    s += (rho_s * unorm2) * (bw * bw.adjoint());
  }
  gram_coeff += rho_s * sc.noise_radar / sc.power_budget * unorm2 * wnorm2;
  s += gram_coeff * state.gram;
  s = hermitize(s);

  const CVec aw = state.reduced_target.adjoint() * state.radar_w;
  CMat rhs(r, static_cast<Eigen::Index>(K) * ns);
  for (int k = 0; k < K; ++k) {
    rhs.middleCols(static_cast<Eigen::Index>(k) * ns, ns) =
        (rho_c * sc.user_weights[k]) *
            (state.reduced_channels[k].adjoint() * state.combiners[k] *
             state.weight_mats[k]) +
        rho_s * aw *
            state.aux_u.segment(static_cast<Eigen::Index>(k) * ns, ns)
                .adjoint();
  }

  Eigen::LDLT<CMat> fac(s);
  CMat sol;
  if (fac.info() == Eigen::Success) sol = fac.solve(rhs);
  if (fac.info() != Eigen::Success || !sol.allFinite()) {
    std::cerr << "update_reduced_precoders: singular system matrix, "
                 "regularizing with 1e-12*I\n";
    sol = (s + 1e-12 * CMat::Identity(r, r)).ldlt().solve(rhs);
  }

  std::vector<CMat> out(K);
  for (int k = 0; k < K; ++k)
    out[k] = sol.middleCols(static_cast<Eigen::Index>(k) * ns, ns);
  return out;
}

CMat update_reduced_precoder(const ReducedState& state, const Scenario& sc,
                             const TradeoffWeights& weights, int k) {
  return update_reduced_precoders(state, sc, weights).at(k);
}

CVec update_auxiliary_u(const ReducedState& state, const Scenario& sc, int k) {
  if (!(state.radar_w.squaredNorm() > 0.0))
    throw std::runtime_error("update_auxiliary_u: radar beamformer is zero");
  const CMat xcat = state.x_cat();
  double f2 = f2_value(state, sc, state.radar_w, xcat, state.power_trace());
  if (!(f2 > 0.0))
    throw std::runtime_error("update_auxiliary_u: non-positive denominator");
  return state.x.at(k).adjoint() *
         (state.reduced_target.adjoint() * state.radar_w) / f2;
}

std::vector<CMat> normalize_precoder(const ReducedState& state,
                                     const SubspaceBasis& basis,
                                     const Scenario& sc) {
  double tr = state.power_trace();
  if (!(tr > 0.0))
    throw std::runtime_error(
        "normalize_precoder: all-zero X (trivial point has no scaling)");
  double alpha = std::sqrt(sc.power_budget / tr);
  std::vector<CMat> f;
  f.reserve(state.x.size());
  for (const auto& x : state.x) f.push_back(alpha * basis.basis * x);
  return f;
}

double surrogate_value(const ReducedState& state, const Scenario& sc,
                       const TradeoffWeights& weights) {
  const int K = sc.dims.n_users;
  double val = 0.0;
  MseOperands op;
  op.gram = state.gram;
  op.x = state.x;
  op.power_budget = sc.power_budget;
  for (int k = 0; k < K; ++k) {
    op.heff = state.reduced_channels[k];
    op.combiner = state.combiners[k];
    op.noise = sc.noise_user[k];
    CMat e = mse_matrix(op, k);
    double tr_le = (state.weight_mats[k] * e).real().trace();
    val += weights.rho_c() * sc.user_weights[k] *
           (tr_le - logdet_hpd(state.weight_mats[k], "Lambda_k"));
  }
  const CMat xcat = state.x_cat();
  double f2 = f2_value(state, sc, state.radar_w, xcat, state.power_trace());
  double quad =
      2.0 * (state.radar_w.adjoint() * state.reduced_target * xcat *
             state.aux_u)(0)
                .real() -
      state.aux_u.squaredNorm() * f2;
  return val - weights.rho_s() * quad;
}

double reduced_wsr(const ReducedState& state, const Scenario& sc) {
  const int K = sc.dims.n_users;
  double tr_sum = state.power_trace();
  double wsr = 0.0;
  for (int k = 0; k < K; ++k) {
    // Rotation-invariant: evaluate on an orthonormal span of the combiner
    // so the noise floor keeps J_k away from singularity. A combiner that
    // collapsed to zero belongs to a switched-off user: zero rate.
    CMat q = orthonormal_range(state.combiners[k]);
    if (q.cols() == 0) continue;
    const CMat wh = q.adjoint() * state.reduced_channels[k];
    CMat j = (sc.noise_user[k] / sc.power_budget) * tr_sum *
             CMat::Identity(q.cols(), q.cols());
    for (int i = 0; i < K; ++i) {
      if (i == k) continue;
      CMat t = wh * state.x[i];
      j += t * t.adjoint();
    }
    CMat sig = wh * state.x[k];
    wsr += sc.user_weights[k] * log2det_ratio(sig * sig.adjoint(), j, "J_k");
  }
  return wsr;
}

double reduced_scnr(const ReducedState& state, const Scenario& sc) {
  const CMat xcat = state.x_cat();
  double f1 =
      (xcat.adjoint() * (state.reduced_target.adjoint() * state.radar_w))
          .squaredNorm();
  double f2 = f2_value(state, sc, state.radar_w, xcat, state.power_trace());
  if (!(f2 > 0.0)) throw std::runtime_error("reduced_scnr: zero denominator");
  return f1 / f2;
}

double reduced_objective(const ReducedState& state, const Scenario& sc,
                         const TradeoffWeights& weights) {
  double comm = weights.rho_c() == 0.0 ? 0.0 : reduced_wsr(state, sc);
  double sense = weights.rho_s() == 0.0 ? 0.0 : reduced_scnr(state, sc);
  return weights.rho_c() * comm + weights.rho_s() * sense;
}

DigitalSolution solve_bcd(const Scenario& sc, const BcdConfig& config,
                          const ReducedState* init,
                          std::vector<BcdTraceRow>* trace,
                          const SubspaceBasis* init_basis) {
  sc.validate();
  config.weights.validate();
  if (!(config.tol > 0.0) || config.max_iter < 1)
    throw std::invalid_argument("solve_bcd: invalid tolerance or iteration cap");

  BasisSelection sel = BasisSelection::all;
  if (config.shrink_pure_basis) {
    if (config.weights.rho_s() == 0.0)
      sel = BasisSelection::comm_only;
    else if (config.weights.rho_c() == 0.0)
      sel = BasisSelection::sensing_only;
  }
  SubspaceBasis basis = init_basis ? *init_basis : subspace_basis(sc, sel);

  ReducedState state;
  if (init) {
    if (init->r() != basis.r())
      throw std::invalid_argument(
          "solve_bcd: init state does not match the basis dimension");
    state = *init;
  } else {
    state = reduce_scenario(sc, basis);
    init_bcd_state(state, sc, basis, config);
  }

  const int K = sc.dims.n_users;
  const int ns = sc.dims.n_streams;
  double prev_obj = reduced_objective(state, sc, config.weights);
  double best_obj = prev_obj;
  ReducedState best_state = state;
  bool converged = false;
  int iters = 0;
  std::vector<double> obj_trace;
  obj_trace.push_back(prev_obj);

  for (int t = 1; t <= config.max_iter; ++t) {
    iters = t;
    if (state.aux_u.squaredNorm() > 0.0)
      state.radar_w = update_radar_beamformer(state, sc);
    for (int k = 0; k < K; ++k)
      state.combiners[k] = update_combiner(state, sc, k);
    for (int k = 0; k < K; ++k) {
      try {
        state.weight_mats[k] = update_weight_matrix(state, k);
      } catch (const std::runtime_error&) {
        // Singular I - W^H Hbar X: nudge X_k off the degenerate point.
        state.x[k] *= (1.0 + 1e-6);
        state.weight_mats[k] = update_weight_matrix(state, k);
      }
    }
    state.x = update_reduced_precoders(state, sc, config.weights);
    for (int k = 0; k < K; ++k)
      state.aux_u.segment(static_cast<Eigen::Index>(k) * ns, ns) =
          update_auxiliary_u(state, sc, k);
    if (config.renormalize_each_sweep) {
      double tr = state.power_trace();
      if (tr > 0.0) {
        double alpha = std::sqrt(sc.power_budget / tr);
        for (auto& x : state.x) x *= alpha;
      }
    }

    double obj = reduced_objective(state, sc, config.weights);
    obj_trace.push_back(obj);
    if (trace) {
      BcdTraceRow row;
      row.iteration = t;
      row.surrogate = surrogate_value(state, sc, config.weights);
      row.objective = obj;
      row.wsr = reduced_wsr(state, sc);
      row.scnr = reduced_scnr(state, sc);
      trace->push_back(row);
    }
    if (obj > best_obj) {
      best_obj = obj;
      best_state = state;
    }
    if (std::abs(obj - prev_obj) < config.tol) {
      converged = true;
      break;
    }
    prev_obj = obj;
  }

  const ReducedState& final_state = converged ? state : best_state;
  DigitalSolution sol;
  sol.precoders = normalize_precoder(final_state, basis, sc);
  sol.combiners = final_state.combiners;
  // A user whose precoder was switched off ends with a zero combiner; hand
  // back a valid placeholder so rate evaluation stays well defined.
  for (auto& w : sol.combiners) {
    if (!(w.norm() > 0.0)) {
      w.setZero();
      w.topRows(ns) = CMat::Identity(ns, ns);
    }
  }
  sol.radar_beamformer = final_state.radar_w;
  sol.objective_trace = std::move(obj_trace);
  sol.converged = converged;
  sol.iterations = iters;
  return sol;
}

TradeoffWeights calibrate_weights(const Scenario& sc, double eta,
                                  const BcdConfig& base) {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("calibrate_weights: eta must lie in [0, 1]");
  TradeoffWeights w;
  w.eta = eta;
  if (eta > 0.0) {
    BcdConfig cfg = base;
    cfg.weights = TradeoffWeights{1.0, 1.0, 1.0};
    cfg.renormalize_each_sweep = true;  // pins the free scale of pure runs
    DigitalSolution comm = solve_bcd(sc, cfg);
    double wsr = weighted_sum_rate(sc, comm);
    if (wsr > 0.0) w.cons1 = wsr;
  }
  if (eta < 1.0) {
    BcdConfig cfg = base;
    cfg.weights = TradeoffWeights{0.0, 1.0, 1.0};
    cfg.renormalize_each_sweep = true;
    DigitalSolution sense = solve_bcd(sc, cfg);
    double s = scnr(sc, sense);
    if (s > 0.0) w.cons2 = s;
  }
  return w;
}

}  // namespace isac
