#include "isac/bd.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>

namespace isac {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Channels of all users except k, then every clutter response.
CMat stack_other_channels(const Scenario& sc, int k) {
  const auto& d = sc.dims;
  const Eigen::Index rows =
      static_cast<Eigen::Index>(d.n_users - 1) * d.n_rx +
      static_cast<Eigen::Index>(d.n_clutter) * d.n_sensor;
  CMat stacked(rows, d.n_tx);
  Eigen::Index at = 0;
  for (int j = 0; j < d.n_users; ++j) {
    if (j == k) continue;
    stacked.middleRows(at, d.n_rx) = sc.channels[j];
    at += d.n_rx;
  }
  for (const auto& b : sc.clutters) {
    stacked.middleRows(at, d.n_sensor) = b;
    at += d.n_sensor;
  }
  return stacked;
}

// Every user channel plus every clutter response.
CMat stack_all_channels(const Scenario& sc) {
  const auto& d = sc.dims;
  const Eigen::Index rows =
      static_cast<Eigen::Index>(d.n_users) * d.n_rx +
      static_cast<Eigen::Index>(d.n_clutter) * d.n_sensor;
  CMat stacked(rows, d.n_tx);
  Eigen::Index at = 0;
  for (const auto& h : sc.channels) {
    stacked.middleRows(at, d.n_rx) = h;
    at += d.n_rx;
  }
  for (const auto& b : sc.clutters) {
    stacked.middleRows(at, d.n_sensor) = b;
    at += d.n_sensor;
  }
  return stacked;
}

struct BdUserParts {
  CMat null_basis;
  CMat comm_dirs;
  CMat combiner;
  RVec gains;
};

BdUserParts bd_user_parts(const Scenario& sc, int k) {
  const auto& d = sc.dims;
  BdUserParts parts;
  parts.null_basis = bd_null_space(stack_other_channels(sc, k));
  const int null_dim = static_cast<int>(parts.null_basis.cols());
  if (null_dim < d.n_streams)
    throw std::runtime_error(
        "BD infeasible for user " + std::to_string(k) + ": null space of the "
        "stacked interference channels has dimension " +
        std::to_string(null_dim) + " < N_s = " + std::to_string(d.n_streams) +
        " (increase N_t)");

  CMat h_bd = sc.channels[k] * parts.null_basis;
  Eigen::JacobiSVD<CMat> svd(h_bd, Eigen::ComputeThinU | Eigen::ComputeThinV);
  parts.comm_dirs =
      parts.null_basis * svd.matrixV().leftCols(d.n_streams);
  parts.combiner = svd.matrixU().leftCols(d.n_streams);
  parts.gains = RVec::Zero(d.n_streams);
  const int avail = std::min<int>(d.n_streams,
                                  static_cast<int>(svd.singularValues().size()));
  parts.gains.head(avail) = svd.singularValues().head(avail);
  return parts;
}

double comm_power_at(double mu, double rho_c, double rho_s,
                     const std::vector<double>& w,
                     const std::vector<RVec>& gains,
                     const std::vector<double>& noises,
                     const std::vector<RVec>& d_coeff, RVec* out_flat) {
  double total = 0.0;
  Eigen::Index flat = 0;
  for (std::size_t k = 0; k < gains.size(); ++k) {
    for (Eigen::Index i = 0; i < gains[k].size(); ++i, ++flat) {
      double p = 0.0;
      double g2 = gains[k][i] * gains[k][i];
      if (w[k] > 0.0 && g2 > 0.0 && rho_c > 0.0) {
        double gap = mu - rho_s * d_coeff[k][i];
        if (!(gap > 0.0)) return std::numeric_limits<double>::infinity();
        p = std::max(0.0, rho_c * w[k] / (kLn2 * gap) - noises[k] / g2);
      }
      if (out_flat) (*out_flat)[flat] = p;
      total += p;
    }
  }
  return total;
}

}  // namespace

double PowerAllocation::total() const {
  double t = 0.0;
  for (const auto& p : comm_powers) t += p.sum();
  for (double p : sense_powers) t += p;
  return t;
}

CMat bd_null_space(const CMat& stacked, double rel_tol) {
  return null_space_basis(stacked, rel_tol);
}

CommPrecoder comm_precoder(const Scenario& sc, int k,
                           const RVec& stream_powers) {
  if (stream_powers.size() != sc.dims.n_streams)
    throw std::invalid_argument("comm_precoder: stream_powers size != N_s");
  if ((stream_powers.array() < 0.0).any())
    throw std::invalid_argument("comm_precoder: negative stream power");
  BdUserParts parts = bd_user_parts(sc, k);
  CommPrecoder out;
  out.precoder = parts.comm_dirs * stream_powers.cwiseSqrt().asDiagonal();
  out.combiner = parts.combiner;
  out.stream_gains = parts.gains;
  return out;
}

CommPrecoder comm_precoder(const Scenario& sc, int k, double user_power) {
  if (user_power < 0.0)
    throw std::invalid_argument("comm_precoder: negative user power");
  RVec even = RVec::Constant(sc.dims.n_streams,
                             user_power / sc.dims.n_streams);
  return comm_precoder(sc, k, even);
}

SensingPrecoder sensing_precoder(const Scenario& sc) {
  const auto& d = sc.dims;
  CVec at = steering_vector(d.n_tx, sc.target_aod);
  CMat vbar = row_space_basis(stack_all_channels(sc));
  CVec proj = at - vbar * (vbar.adjoint() * at);
  SensingPrecoder out;
  if (proj.norm() <= 1e-8) {
    // Target direction inside the communication subspace: communication
    // power alone illuminates it.
    out.f_sen = CVec::Zero(d.n_tx);
    out.f_sen_mat = CMat::Zero(d.n_tx, d.n_streams);
    return out;
  }
  out.f_sen = proj / (proj.norm() * std::sqrt(static_cast<double>(d.n_streams)));
  out.f_sen_mat = out.f_sen * Eigen::RowVectorXcd::Ones(d.n_streams);
  return out;
}

void scnr_coefficients(const Scenario& sc, BdDecomposition& dec) {
  const auto& d = sc.dims;
  const CVec at = steering_vector(d.n_tx, sc.target_aod);
  const double kappa = sc.target_var / sc.noise_radar;
  const Complex af = (at.adjoint() * dec.sensing_dir)(0);

  dec.d_coeff.resize(d.n_users);
  dec.e_coeff.resize(d.n_users);
  for (int k = 0; k < d.n_users; ++k) {
    Eigen::RowVectorXcd ac = at.adjoint() * dec.comm_dirs[k];
    dec.d_coeff[k] = kappa * ac.cwiseAbs2().transpose();
    dec.e_coeff[k] =
        2.0 * kappa * (std::conj(af) * ac.array()).real().transpose();
  }
  dec.g_coeff = kappa * d.n_streams * std::norm(af);
}

BdDecomposition bd_decompose(const Scenario& sc) {
  sc.validate();
  const int K = sc.dims.n_users;
  BdDecomposition dec;
  dec.null_basis.resize(K);
  dec.comm_dirs.resize(K);
  dec.combiners.resize(K);
  dec.stream_gains.resize(K);
  for (int k = 0; k < K; ++k) {
    BdUserParts parts = bd_user_parts(sc, k);
    dec.null_basis[k] = std::move(parts.null_basis);
    dec.comm_dirs[k] = std::move(parts.comm_dirs);
    dec.combiners[k] = std::move(parts.combiner);
    dec.stream_gains[k] = std::move(parts.gains);
  }
  SensingPrecoder sen = sensing_precoder(sc);
  dec.sensing_dir = std::move(sen.f_sen);
  dec.sensing_precoder = std::move(sen.f_sen_mat);
  scnr_coefficients(sc, dec);
  return dec;
}

PowerAllocation allocate_power(double rho_c, double rho_s,
                               const std::vector<double>& user_weights,
                               const std::vector<RVec>& stream_gains,
                               const std::vector<double>& noises,
                               const std::vector<RVec>& d_coeff,
                               double g_coeff, double power_budget) {
  if (!(power_budget > 0.0))
    throw std::invalid_argument("allocate_power: power budget must be positive");
  if (rho_c < 0.0 || rho_s < 0.0 || (rho_c == 0.0 && rho_s == 0.0))
    throw std::invalid_argument("allocate_power: need rho_c, rho_s >= 0, not both zero");
  const std::size_t K = stream_gains.size();
  if (user_weights.size() != K || noises.size() != K || d_coeff.size() != K)
    throw std::invalid_argument("allocate_power: inconsistent per-user sizes");

  Eigen::Index n_streams_total = 0;
  for (const auto& g : stream_gains) n_streams_total += g.size();

  PowerAllocation alloc;
  alloc.comm_powers.resize(K);
  for (std::size_t k = 0; k < K; ++k)
    alloc.comm_powers[k] = RVec::Zero(stream_gains[k].size());
  alloc.sense_powers.assign(K, 0.0);

  auto scatter = [&](const RVec& flat) {
    Eigen::Index at = 0;
    for (std::size_t k = 0; k < K; ++k) {
      alloc.comm_powers[k] = flat.segment(at, stream_gains[k].size());
      at += stream_gains[k].size();
    }
  };

  // Usable streams are those the water-filling formula can fill.
  double max_d_usable = -std::numeric_limits<double>::infinity();
  bool any_usable = false;
  for (std::size_t k = 0; k < K; ++k)
    for (Eigen::Index i = 0; i < stream_gains[k].size(); ++i)
      if (user_weights[k] > 0.0 && stream_gains[k][i] > 0.0) {
        any_usable = true;
        max_d_usable = std::max(max_d_usable, d_coeff[k][i]);
      }

  if (rho_c == 0.0 || !any_usable) {
    // Linear objective: the budget goes to the largest coefficient family.
    if (rho_s > 0.0 && (!any_usable || g_coeff >= max_d_usable)) {
      if (g_coeff <= 0.0 && !any_usable)
        throw std::runtime_error(
            "allocate_power: no stream or sensing direction can absorb power");
      for (std::size_t k = 0; k < K; ++k)
        alloc.sense_powers[k] = power_budget / static_cast<double>(K);
      alloc.water_level = rho_s * g_coeff;
      return alloc;
    }
    if (!any_usable)
      throw std::runtime_error(
          "allocate_power: no stream or sensing direction can absorb power");
    // rho_c == 0 with a dominating d: everything on that one stream.
    std::size_t bk = 0;
    Eigen::Index bi = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < K; ++k)
      for (Eigen::Index i = 0; i < stream_gains[k].size(); ++i)
        if (user_weights[k] > 0.0 && stream_gains[k][i] > 0.0 &&
            d_coeff[k][i] > best) {
          best = d_coeff[k][i];
          bk = k;
          bi = i;
        }
    alloc.comm_powers[bk][bi] = power_budget;
    alloc.water_level = rho_s * best;
    return alloc;
  }

  RVec flat(n_streams_total);
  const double mu_floor = rho_s * std::max(max_d_usable, 0.0);
  const double mu_sense = rho_s * g_coeff;

  // Boundary branch: mu pinned at rho_s * g, sensing takes the remainder.
  if (rho_s > 0.0 && g_coeff > 0.0 && mu_sense > mu_floor) {
    const double eps = 1e-12 * std::max(1.0, mu_sense);
    double used = comm_power_at(mu_sense + eps, rho_c, rho_s, user_weights,
                                stream_gains, noises, d_coeff, &flat);
    if (used < power_budget) {
      scatter(flat);
      double rest = (power_budget - used) / static_cast<double>(K);
      for (std::size_t k = 0; k < K; ++k) alloc.sense_powers[k] = rest;
      alloc.water_level = mu_sense;
      return alloc;
    }
  }

  // Interior branch: bisection on mu, all power to communication.
  double lo = std::max(mu_floor, mu_sense);
  double hi = lo + std::max(1.0, std::abs(lo));
  int guard = 0;
  while (comm_power_at(hi, rho_c, rho_s, user_weights, stream_gains, noises,
                       d_coeff, nullptr) > power_budget) {
    hi = lo + 2.0 * (hi - lo);
    if (++guard > 200)
      throw std::runtime_error(
          "allocate_power: failed to bracket the water level (total demand "
          "never drops below the budget)");
  }
  double mu = hi;
  double total = comm_power_at(mu, rho_c, rho_s, user_weights, stream_gains,
                               noises, d_coeff, &flat);
  const double power_tol = 1e-12 * std::max(1.0, power_budget);
  for (int it = 0;
       it < 200 && std::abs(total - power_budget) > power_tol; ++it) {
    mu = 0.5 * (lo + hi);
    total = comm_power_at(mu, rho_c, rho_s, user_weights, stream_gains,
                          noises, d_coeff, &flat);
    if (total > power_budget)
      lo = mu;
    else
      hi = mu;
  }
  if (!std::isfinite(total) ||
      std::abs(total - power_budget) > 1e-8 * std::max(1.0, power_budget))
    throw std::runtime_error(
        "allocate_power: bisection failed to meet the power budget (residual " +
        std::to_string(total - power_budget) + " W)");
  scatter(flat);
  alloc.water_level = mu;
  return alloc;
}

double power_objective(double rho_c, double rho_s,
                       const std::vector<double>& user_weights,
                       const std::vector<RVec>& stream_gains,
                       const std::vector<double>& noises,
                       const std::vector<RVec>& d_coeff, double g_coeff,
                       const PowerAllocation& alloc) {
  double obj = 0.0;
  for (std::size_t k = 0; k < stream_gains.size(); ++k) {
    for (Eigen::Index i = 0; i < stream_gains[k].size(); ++i) {
      double g2 = stream_gains[k][i] * stream_gains[k][i];
      double p = alloc.comm_powers[k][i];
      if (rho_c > 0.0 && user_weights[k] > 0.0)
        obj += rho_c * user_weights[k] * std::log2(1.0 + g2 * p / noises[k]);
      obj += rho_s * d_coeff[k][i] * p;
    }
    obj += rho_s * g_coeff * alloc.sense_powers[k];
  }
  return obj;
}

double bd_cross_term_ratio(const BdDecomposition& dec,
                           const PowerAllocation& alloc) {
  double cross = 0.0, linear = 0.0;
  for (std::size_t k = 0; k < dec.d_coeff.size(); ++k) {
    for (Eigen::Index i = 0; i < dec.d_coeff[k].size(); ++i) {
      cross += dec.e_coeff[k][i] *
               std::sqrt(alloc.comm_powers[k][i] * alloc.sense_powers[k]);
      linear += dec.d_coeff[k][i] * alloc.comm_powers[k][i];
    }
    linear += dec.g_coeff * alloc.sense_powers[k];
  }
  return linear > 0.0 ? std::abs(cross) / linear : 0.0;
}

DigitalSolution solve_bd(const Scenario& sc, const TradeoffWeights& weights) {
  weights.validate();
  BdDecomposition dec = bd_decompose(sc);
  std::vector<double> noises = sc.noise_user;
  PowerAllocation alloc = allocate_power(
      weights.rho_c(), weights.rho_s(), sc.user_weights, dec.stream_gains,
      noises, dec.d_coeff, dec.g_coeff, sc.power_budget);

  double cross = bd_cross_term_ratio(dec, alloc);
  if (cross > 0.1)
    std::cerr << "solve_bd: neglected SCNR cross term is "
              << cross * 100.0 << "% of the linear terms\n";

  DigitalSolution sol;
  sol.precoders.resize(sc.dims.n_users);
  sol.combiners = dec.combiners;
  for (int k = 0; k < sc.dims.n_users; ++k) {
    sol.precoders[k] =
        dec.comm_dirs[k] * alloc.comm_powers[k].cwiseSqrt().asDiagonal() +
        std::sqrt(alloc.sense_powers[k]) * dec.sensing_precoder;
  }
  sol.radar_beamformer = steering_vector(sc.dims.n_sensor, sc.target_aoa);
  sol.converged = true;
  sol.iterations = 1;
  sol.objective_trace = {isac_objective(sc, sol, weights)};
  return sol;
}

}  // namespace isac
