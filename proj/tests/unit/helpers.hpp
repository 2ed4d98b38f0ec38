#pragma once

// Shared builders for desk-scale test scenarios. These use O(1) gains and
// unit noise so finite-difference and tolerance checks are well scaled.

#include <vector>

#include "isac/metrics.hpp"

namespace isac_test {

struct Shape {
  int nt = 8;
  int nr = 2;
  int ns = 1;
  int users = 2;
  int nsen = 4;
  int clutter = 1;
  int paths = 2;
  double noise = 1.0;
  double power = 4.0;
};

// Angle-structured scenario: channels really are sums of steering outer
// products, so the steering basis spans them.
inline isac::Scenario structured_scenario(std::uint64_t seed, Shape sh = {}) {
  using namespace isac;
  constexpr double kHalfPi = 1.5707963267948966;
  Rng rng(seed);
  Scenario sc;
  sc.dims.n_tx = sh.nt;
  sc.dims.n_rx = sh.nr;
  sc.dims.n_streams = sh.ns;
  sc.dims.n_users = sh.users;
  sc.dims.n_rf_tx = std::max(sh.users * sh.ns, sh.nt / 2);
  sc.dims.n_rf_rx = sh.ns;
  sc.dims.n_sensor = sh.nsen;
  sc.dims.n_clutter = sh.clutter;

  sc.user_paths.resize(sh.users);
  sc.channels.resize(sh.users);
  for (int k = 0; k < sh.users; ++k) {
    std::vector<Complex> gains;
    for (int l = 0; l < sh.paths; ++l) {
      sc.user_paths[k].push_back({1.0, rng.uniform(-kHalfPi, kHalfPi),
                                  rng.uniform(-kHalfPi, kHalfPi)});
      gains.push_back(rng.cnormal(1.0));
    }
    sc.channels[k] = user_channel_from_gains(sc.dims, sc.user_paths[k], gains);
  }
  sc.target_aod = rng.uniform(-kHalfPi, kHalfPi);
  sc.target_aoa = rng.uniform(-kHalfPi, kHalfPi);
  sc.target_var = 2.0;
  sc.target = response_matrix(sc.target_var, sc.target_aoa, sc.target_aod,
                              sh.nsen, sh.nt);
  for (int i = 0; i < sh.clutter; ++i) {
    sc.clutter_aod.push_back(rng.uniform(-kHalfPi, kHalfPi));
    sc.clutter_aoa.push_back(rng.uniform(-kHalfPi, kHalfPi));
    sc.clutter_vars.push_back(3.0);
    sc.clutters.push_back(response_matrix(3.0, sc.clutter_aoa[i],
                                          sc.clutter_aod[i], sh.nsen, sh.nt));
  }
  sc.noise_user.assign(sh.users, sh.noise);
  sc.noise_radar = sh.noise;
  sc.power_budget = sh.power;
  sc.user_weights.assign(sh.users, 1.0);
  sc.validate();
  return sc;
}

// Random feasible solution at (or under) the power budget.
inline isac::DigitalSolution random_solution(std::uint64_t seed,
                                             const isac::Scenario& sc,
                                             double power_fraction = 1.0) {
  using namespace isac;
  Rng rng(seed);
  DigitalSolution sol;
  sol.precoders.resize(sc.dims.n_users);
  sol.combiners.resize(sc.dims.n_users);
  for (int k = 0; k < sc.dims.n_users; ++k) {
    sol.precoders[k].resize(sc.dims.n_tx, sc.dims.n_streams);
    sol.combiners[k].resize(sc.dims.n_rx, sc.dims.n_streams);
    for (int i = 0; i < sc.dims.n_tx; ++i)
      for (int j = 0; j < sc.dims.n_streams; ++j)
        sol.precoders[k](i, j) = rng.cnormal(1.0);
    for (int i = 0; i < sc.dims.n_rx; ++i)
      for (int j = 0; j < sc.dims.n_streams; ++j)
        sol.combiners[k](i, j) = rng.cnormal(1.0);
  }
  double p = sol.transmit_power();
  double scale = std::sqrt(power_fraction * sc.power_budget / p);
  for (auto& f : sol.precoders) f *= scale;
  sol.radar_beamformer = CVec(sc.dims.n_sensor);
  for (int i = 0; i < sc.dims.n_sensor; ++i)
    sol.radar_beamformer[i] = rng.cnormal(1.0);
  return sol;
}

}  // namespace isac_test
