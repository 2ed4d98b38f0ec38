#pragma once

#include <optional>
#include <vector>

#include "isac/linalg.hpp"
#include "isac/rng.hpp"

namespace isac {

// ---------------------------------------------------------------------------
// Problem dimensions and generation parameters
// ---------------------------------------------------------------------------

struct SystemDims {
  int n_tx = 64;       // BS antennas
  int n_rx = 4;        // antennas per UE
  int n_streams = 2;   // data streams per UE
  int n_users = 5;     // UE count
  int n_rf_tx = 10;    // BS RF chains
  int n_rf_rx = 2;     // UE RF chains
  int n_sensor = 16;   // radar receive antennas
  int n_clutter = 2;   // clutter patch count

  // K*Ns <= Nrf_t <= Nt and Ns <= Nrf_r <= Nr; throws on violation.
  void validate() const;
};

struct PathSpec {
  double gain_variance = 1.0;  // E|beta|^2
  double aod = 0.0;            // radians, departure angle at the BS
  double aoa = 0.0;            // radians, arrival angle at the UE
};

struct ChannelGenParams {
  int n_paths_per_user = 3;         // 1 LOS + (n-1) NLOS
  double pathloss_intercept = 61.4; // dB at 1 m
  double pathloss_exponent = 2.0;
  double shadowing_std = 5.8;       // dB
  double rician_offset = 7.0;       // dB penalty on NLOS paths
  double carrier_hz = 28e9;

  void validate() const;
};

// 2-D layout used to derive link distances. Angles, when not pinned here,
// are drawn uniformly from [-pi/2, pi/2].
struct Geometry {
  Eigen::Vector2d bs_pos{20.0, 30.0};
  Eigen::Vector2d radar_pos{15.0, 15.0};
  std::vector<Eigen::Vector2d> ue_pos;  // optional explicit positions
  double ue_dist_min = 30.0;            // sampling range when ue_pos empty
  double ue_dist_max = 100.0;
  std::optional<std::vector<double>> ue_aod;      // pins each LOS AoD (rad)
  std::optional<double> target_aod;               // theta_0 at the BS
  std::optional<double> target_aoa;               // phi_0 at the radar
  std::optional<std::vector<double>> clutter_aod; // theta_i
  std::optional<std::vector<double>> clutter_aoa; // phi_i
};

// Fully realized problem instance. Immutable after construction.
struct Scenario {
  SystemDims dims;
  std::vector<CMat> channels;       // H_k, Nr x Nt
  CMat target;                      // A = sigma_A a_s(phi0) a_t(theta0)^H
  std::vector<CMat> clutters;       // B_i, Nsen x Nt

  std::vector<std::vector<PathSpec>> user_paths;  // realized per-user paths
  double target_aod = 0.0;          // theta_0
  double target_aoa = 0.0;          // phi_0
  std::vector<double> clutter_aod;  // theta_i
  std::vector<double> clutter_aoa;  // phi_i

  std::vector<double> noise_user;   // sigma_k^2, watts
  double noise_radar = 1e-12;       // sigma^2, watts
  double power_budget = 1.0;        // P_t, watts
  std::vector<double> user_weights; // w_k
  double target_var = 0.0;          // sigma_A^2
  std::vector<double> clutter_vars; // sigma_Bi^2

  int total_paths() const;          // sum L_k + I + 1

  void validate() const;
};

// Knobs for build_scenario beyond the defaults above. dB quantities are
// relative to the radar noise floor.
struct ScenarioGenConfig {
  SystemDims dims;
  ChannelGenParams chan;
  Geometry geometry;
  double noise_user_dbm = -90.0;
  double noise_radar_dbm = -90.0;
  double pt_dbm = 30.0;
  double target_gain_db = 20.0;    // sigma_A^2 / sigma^2
  double clutter_gain_db = 40.0;   // mean_i sigma_Bi^2 / sigma^2
  std::vector<double> user_weights;  // empty -> all ones
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Half-wavelength ULA steering vector: entry m = exp(j pi m sin(angle)) / sqrt(n).
CVec steering_vector(int n, double angle);

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Variance of the complex path gain for a link of length `distance` (m).
/// `shadow_db` is the realized shadowing term (0 when shadowing_std == 0).
double path_gain_variance(double distance, const ChannelGenParams& params,
                          bool is_los, double shadow_db);

/// Draws the shadowing term internally, then beta ~ CN(0, variance).
Complex path_gain_sample(Rng& rng, double distance,
                         const ChannelGenParams& params, bool is_los);

/// H = sum_l beta_l a_r(aoa_l) a_t(aod_l)^H with the gains given explicitly.
CMat user_channel_from_gains(const SystemDims& dims,
                             const std::vector<PathSpec>& paths,
                             const std::vector<Complex>& gains);

struct UserChannel {
  CMat h;
  std::vector<Complex> gains;
};

/// Draws beta_l ~ CN(0, gain_variance_l) per path and assembles the channel.
UserChannel generate_user_channel(Rng& rng, const SystemDims& dims,
                                  const std::vector<PathSpec>& paths);

/// sqrt(var) * a_rx(aoa) a_tx(aod)^H; rank one by construction.
CMat response_matrix(double var, double aoa, double aod, int n_rx, int n_tx);

/// Realizes channels, target/clutter responses and power levels. All draws
/// come from sub-streams of `rng`, so the result depends only on the seed.
Scenario build_scenario(const Rng& rng, const ScenarioGenConfig& cfg);

}  // namespace isac
