#include "isac/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace isac {

double DigitalSolution::transmit_power() const {
  double p = 0.0;
  for (const auto& f : precoders) p += f.squaredNorm();
  return p;
}

void DigitalSolution::validate(const Scenario& sc) const {
  const auto& d = sc.dims;
  if (static_cast<int>(precoders.size()) != d.n_users ||
      static_cast<int>(combiners.size()) != d.n_users)
    throw std::invalid_argument("solution has wrong number of users");
  for (const auto& f : precoders)
    if (f.rows() != d.n_tx || f.cols() != d.n_streams)
      throw std::invalid_argument("precoder dimensions inconsistent");
  for (const auto& w : combiners)
    if (w.rows() != d.n_rx || w.cols() != d.n_streams)
      throw std::invalid_argument("combiner dimensions inconsistent");
  if (radar_beamformer.size() != d.n_sensor)
    throw std::invalid_argument("radar beamformer dimension inconsistent");
  if (transmit_power() > sc.power_budget * (1.0 + 1e-9))
    throw std::invalid_argument("transmit power exceeds budget");
}

void TradeoffWeights::validate() const {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("eta must lie in [0, 1]");
  if (!(cons1 > 0.0) || !(cons2 > 0.0))
    throw std::invalid_argument("normalization constants must be positive");
}

double user_rate(const Scenario& sc, const DigitalSolution& sol, int k) {
  const CMat& h = sc.channels.at(k);
  // The rate is invariant to invertible right-rotations of the combiner;
  // evaluating on an orthonormal basis of its numerical range keeps J_k
  // well conditioned at physical noise floors and drops collapsed streams.
  CMat q = orthonormal_range(sol.combiners.at(k));
  if (q.cols() == 0)
    throw std::runtime_error("user_rate: degenerate combiner for user " +
                             std::to_string(k) +
                             " (interference-plus-noise matrix singular)");
  const CMat wh = q.adjoint() * h;  // rank x Nt

  CMat j = sc.noise_user[k] * CMat::Identity(q.cols(), q.cols());
  for (int i = 0; i < sc.dims.n_users; ++i) {
    if (i == k) continue;
    CMat t = wh * sol.precoders[i];
    j += t * t.adjoint();
  }
  CMat s = wh * sol.precoders[k];
  s = s * s.adjoint();
  return log2det_ratio(s, j, "J_k");
}

double weighted_sum_rate(const Scenario& sc, const DigitalSolution& sol) {
  double r = 0.0;
  for (int k = 0; k < sc.dims.n_users; ++k)
    r += sc.user_weights[k] * user_rate(sc, sol, k);
  return r;
}

double scnr(const Scenario& sc, const DigitalSolution& sol) {
  const CVec& w = sol.radar_beamformer;
  double num = 0.0, den = sc.noise_radar * w.squaredNorm();
  for (const auto& f : sol.precoders)
    num += (f.adjoint() * (sc.target.adjoint() * w)).squaredNorm();
  for (const auto& b : sc.clutters) {
    CVec bw = b.adjoint() * w;
    for (const auto& f : sol.precoders) den += (f.adjoint() * bw).squaredNorm();
  }
  if (!(den > 0.0)) throw std::runtime_error("scnr: non-positive denominator");
  return num / den;
}

double isac_objective(const Scenario& sc, const DigitalSolution& sol,
                      const TradeoffWeights& weights) {
  weights.validate();
  double comm = weights.rho_c() == 0.0 ? 0.0 : weighted_sum_rate(sc, sol);
  double sense = weights.rho_s() == 0.0 ? 0.0 : scnr(sc, sol);
  return weights.rho_c() * comm + weights.rho_s() * sense;
}

CMat mse_matrix(const MseOperands& op, int k) {
  const CMat& w = op.combiner;
  const CMat wh = w.adjoint() * op.heff;
  const int ns = static_cast<int>(w.cols());

  double tr_all = 0.0;
  for (const auto& x : op.x) tr_all += (op.gram * x * x.adjoint()).real().trace();

  CMat jbar = (op.noise / op.power_budget) * tr_all *
              CMat::Identity(op.heff.rows(), op.heff.rows());
  for (std::size_t i = 0; i < op.x.size(); ++i) {
    if (static_cast<int>(i) == k) continue;
    CMat t = op.heff * op.x[i];
    jbar += t * t.adjoint();
  }
  CMat d = CMat::Identity(ns, ns) - wh * op.x.at(k);
  return hermitize(d * d.adjoint() + w.adjoint() * jbar * w);
}

RVec transmit_beam_pattern(const CMat& precoder, const RVec& angle_grid) {
  if (angle_grid.size() == 0)
    throw std::invalid_argument("transmit_beam_pattern: empty angle grid");
  RVec pattern(angle_grid.size());
  for (Eigen::Index i = 0; i < angle_grid.size(); ++i) {
    CVec a = steering_vector(static_cast<int>(precoder.rows()), angle_grid[i]);
    pattern[i] = (a.adjoint() * precoder).squaredNorm();
  }
  return pattern;
}

}  // namespace isac
