#include "isac/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace isac {

namespace {
constexpr double kPi = 3.14159265358979323846;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

void SystemDims::validate() const {
  require(n_tx >= 1 && n_rx >= 1 && n_streams >= 1 && n_users >= 1 &&
              n_rf_tx >= 1 && n_rf_rx >= 1 && n_sensor >= 1,
          "all antenna/stream/user counts must be positive");
  require(n_clutter >= 0, "clutter count must be non-negative");
  require(n_users * n_streams <= n_rf_tx && n_rf_tx <= n_tx,
          "need K*Ns <= Nrf_tx <= Nt");
  require(n_streams <= n_rf_rx && n_rf_rx <= n_rx,
          "need Ns <= Nrf_rx <= Nr");
}

void ChannelGenParams::validate() const {
  require(n_paths_per_user >= 1, "n_paths_per_user must be >= 1");
  require(pathloss_exponent > 0.0, "pathloss_exponent must be positive");
  require(shadowing_std >= 0.0, "shadowing_std must be non-negative");
  require(carrier_hz > 0.0, "carrier_hz must be positive");
}

int Scenario::total_paths() const {
  int r = static_cast<int>(clutter_aod.size()) + 1;
  for (const auto& paths : user_paths) r += static_cast<int>(paths.size());
  return r;
}

void Scenario::validate() const {
  dims.validate();
  require(static_cast<int>(channels.size()) == dims.n_users,
          "channel list size != n_users");
  for (const auto& h : channels)
    require(h.rows() == dims.n_rx && h.cols() == dims.n_tx,
            "channel dimensions inconsistent with dims");
  require(target.rows() == dims.n_sensor && target.cols() == dims.n_tx,
          "target response dimensions inconsistent with dims");
  require(static_cast<int>(clutters.size()) == dims.n_clutter,
          "clutter list size != n_clutter");
  for (const auto& b : clutters)
    require(b.rows() == dims.n_sensor && b.cols() == dims.n_tx,
            "clutter response dimensions inconsistent with dims");
  require(static_cast<int>(noise_user.size()) == dims.n_users,
          "noise_user size != n_users");
  for (double s : noise_user) require(s > 0.0, "user noise must be positive");
  require(noise_radar > 0.0, "radar noise must be positive");
  require(power_budget > 0.0, "power budget must be positive");
  require(static_cast<int>(user_weights.size()) == dims.n_users,
          "user_weights size != n_users");
  for (double w : user_weights)
    require(w >= 0.0, "user weights must be non-negative");
  require(target_var >= 0.0, "target variance must be non-negative");
}

CVec steering_vector(int n, double angle) {
  require(n >= 1, "steering_vector: antenna count must be >= 1");
  CVec v(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double phase_step = kPi * std::sin(angle);
  for (int m = 0; m < n; ++m)
    v[m] = scale * std::exp(kImag * (phase_step * m));
  return v;
}

double path_gain_variance(double distance, const ChannelGenParams& params,
                          bool is_los, double shadow_db) {
  require(distance > 0.0, "path_gain_variance: distance must be positive");
  double kappa = params.pathloss_intercept +
                 10.0 * params.pathloss_exponent * std::log10(distance) +
                 shadow_db;
  if (!is_los) kappa += params.rician_offset;
  return std::pow(10.0, -0.1 * kappa);
}

Complex path_gain_sample(Rng& rng, double distance,
                         const ChannelGenParams& params, bool is_los) {
  require(distance > 0.0, "path_gain_sample: distance must be positive");
  double shadow = params.shadowing_std > 0.0 ? rng.normal(params.shadowing_std) : 0.0;
  return rng.cnormal(path_gain_variance(distance, params, is_los, shadow));
}

CMat user_channel_from_gains(const SystemDims& dims,
                             const std::vector<PathSpec>& paths,
                             const std::vector<Complex>& gains) {
  require(!paths.empty(), "user channel needs at least one path");
  require(paths.size() == gains.size(), "path list and gain list size mismatch");
  CMat h = CMat::Zero(dims.n_rx, dims.n_tx);
  for (std::size_t l = 0; l < paths.size(); ++l) {
    h += gains[l] * steering_vector(dims.n_rx, paths[l].aoa) *
         steering_vector(dims.n_tx, paths[l].aod).adjoint();
  }
  return h;
}

UserChannel generate_user_channel(Rng& rng, const SystemDims& dims,
                                  const std::vector<PathSpec>& paths) {
  require(!paths.empty(), "user channel needs at least one path");
  UserChannel uc;
  uc.gains.reserve(paths.size());
  for (const auto& p : paths) {
    require(p.gain_variance >= 0.0, "path gain variance must be >= 0");
    uc.gains.push_back(rng.cnormal(p.gain_variance));
  }
  uc.h = user_channel_from_gains(dims, paths, uc.gains);
  return uc;
}

CMat response_matrix(double var, double aoa, double aod, int n_rx, int n_tx) {
  require(var >= 0.0, "response_matrix: variance must be non-negative");
  return std::sqrt(var) * steering_vector(n_rx, aoa) *
         steering_vector(n_tx, aod).adjoint();
}

Scenario build_scenario(const Rng& rng, const ScenarioGenConfig& cfg) {
  cfg.dims.validate();
  cfg.chan.validate();
  const SystemDims& d = cfg.dims;
  const Geometry& geo = cfg.geometry;
  const int K = d.n_users;
  const int I = d.n_clutter;
  const int L = cfg.chan.n_paths_per_user;

  if (!geo.ue_pos.empty())
    require(static_cast<int>(geo.ue_pos.size()) == K,
            "geometry: ue_pos size != n_users");
  if (geo.ue_aod)
    require(static_cast<int>(geo.ue_aod->size()) == K,
            "geometry: ue_aod size != n_users");
  if (geo.clutter_aod)
    require(static_cast<int>(geo.clutter_aod->size()) == I,
            "geometry: clutter_aod size != n_clutter");
  if (geo.clutter_aoa)
    require(static_cast<int>(geo.clutter_aoa->size()) == I,
            "geometry: clutter_aoa size != n_clutter");
  require(geo.ue_dist_min > 0.0 && geo.ue_dist_max >= geo.ue_dist_min,
          "geometry: invalid UE distance range");

  // One sub-stream per entity class; draws in one class never shift
  // draws in another.
  Rng rng_pos = rng.stream(0);
  Rng rng_angles = rng.stream(1);
  Rng rng_gains = rng.stream(2);
  Rng rng_sensing = rng.stream(3);

  Scenario sc;
  sc.dims = d;
  sc.noise_radar = dbm_to_watt(cfg.noise_radar_dbm);
  sc.power_budget = dbm_to_watt(cfg.pt_dbm);
  sc.noise_user.assign(K, dbm_to_watt(cfg.noise_user_dbm));
  sc.user_weights =
      cfg.user_weights.empty() ? std::vector<double>(K, 1.0) : cfg.user_weights;
  require(static_cast<int>(sc.user_weights.size()) == K,
          "user_weights size != n_users");

  // UE links: distance from configured positions or sampled range.
  std::vector<double> dist(K);
  for (int k = 0; k < K; ++k) {
    if (!geo.ue_pos.empty())
      dist[k] = (geo.ue_pos[k] - geo.bs_pos).norm();
    else
      dist[k] = rng_pos.uniform(geo.ue_dist_min, geo.ue_dist_max);
    require(dist[k] > 0.0, "UE distance must be positive");
  }

  sc.user_paths.resize(K);
  sc.channels.resize(K);
  for (int k = 0; k < K; ++k) {
    auto& paths = sc.user_paths[k];
    paths.resize(L);
    for (int l = 0; l < L; ++l) {
      bool los = (l == 0);
      double aod = (los && geo.ue_aod) ? (*geo.ue_aod)[k]
                                       : rng_angles.uniform(-kPi / 2, kPi / 2);
      double aoa = rng_angles.uniform(-kPi / 2, kPi / 2);
      double shadow = cfg.chan.shadowing_std > 0.0
                          ? rng_gains.normal(cfg.chan.shadowing_std)
                          : 0.0;
      paths[l] = {path_gain_variance(dist[k], cfg.chan, los, shadow), aod, aoa};
    }
    sc.channels[k] = generate_user_channel(rng_gains, d, paths).h;
  }

  // Target and clutter responses, calibrated against the radar noise floor.
  sc.target_aod = geo.target_aod ? *geo.target_aod
                                 : rng_sensing.uniform(-kPi / 2, kPi / 2);
  sc.target_aoa = geo.target_aoa ? *geo.target_aoa
                                 : rng_sensing.uniform(-kPi / 2, kPi / 2);
  sc.target_var = db_to_linear(cfg.target_gain_db) * sc.noise_radar;
  sc.target = response_matrix(sc.target_var, sc.target_aoa, sc.target_aod,
                              d.n_sensor, d.n_tx);

  // Uniform split: every patch carries the configured mean power.
  double clutter_var = db_to_linear(cfg.clutter_gain_db) * sc.noise_radar;
  sc.clutter_aod.resize(I);
  sc.clutter_aoa.resize(I);
  sc.clutter_vars.assign(I, clutter_var);
  sc.clutters.resize(I);
  for (int i = 0; i < I; ++i) {
    sc.clutter_aod[i] = geo.clutter_aod ? (*geo.clutter_aod)[i]
                                        : rng_sensing.uniform(-kPi / 2, kPi / 2);
    sc.clutter_aoa[i] = geo.clutter_aoa ? (*geo.clutter_aoa)[i]
                                        : rng_sensing.uniform(-kPi / 2, kPi / 2);
    sc.clutters[i] = response_matrix(clutter_var, sc.clutter_aoa[i],
                                     sc.clutter_aod[i], d.n_sensor, d.n_tx);
  }

  sc.validate();
  return sc;
}

}  // namespace isac
