#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "webqoe/core/types.hpp"

namespace webqoe::sim {

enum class SimMode { Deterministic, Stochastic };

struct ServiceProfile {
  std::string service_id;
  double base_rtt_ms = 20.0;
  double mean_segment_len = 1000.0;  // bytes per data segment
  int segments_per_page = 40;
  int pages_per_session = 12;
  double rto_ms = 600.0;
};

// Planted linear response a + b*T + c*X, with T the measured
// retransmitted-packets-per-second of the cell and X the service dummy.
struct LinearEffect {
  double intercept = 0.0;
  double per_retrans = 0.0;
  double per_service = 0.0;

  double at(double t, double x) const { return intercept + per_retrans * t + per_service * x; }
};

struct BehaviorModel {
  LinearEffect achievement{0.98, -0.012, -0.02};         // probability, clamped to [0,1]
  LinearEffect latent_satisfaction{0.7, -0.07, -0.12};   // latent scale value
  LinearEffect effort{1.0, 0.03, 0.05};                  // multiplier on count means
  double rating_dispersion = 1.0;
  double mean_wheel_spins = 30.0;
  double mean_mouse_distance = 1.5;
  double mean_clicks = 25.0;
  double mean_keystrokes = 40.0;
  int conditions_high = 2;
  int conditions_mid = 2;
  int conditions_low = 2;
};

struct SimSettings {
  int n_subjects = 35;
  SimMode mode = SimMode::Stochastic;
  std::vector<ServiceProfile> profiles;
  BehaviorModel behavior;
};

// First service gets 1200-byte segments, the rest 1000: the two default
// services differ by 200 bytes.
std::vector<ServiceProfile> default_profiles(const std::vector<std::string>& services);

// Reads the optional "simulator" section of a config document; anything
// absent falls back to defaults for the given study config.
SimSettings settings_from_config_json(const nlohmann::json& config_root,
                                      const StudyConfig& config);
nlohmann::ordered_json settings_to_json(const SimSettings& settings);

// One page-per-connection browsing trace. Handshake segments always arrive;
// data segments are dropped with the environment's loss probability in
// Stochastic mode and retransmitted after the profile's RTO. Every covering
// ack is observed exactly one RTT after the segment it acknowledges.
PacketTrace synth_trace(const Environment& env, const ServiceProfile& profile,
                        std::uint64_t seed, SimMode mode);

// Session logs for one cell. retrans_pkts_per_s feeds the planted behavior
// responses; pass a negative value to use a coarse analytic estimate from
// env and profile.
std::vector<SessionLog> synth_sessions(const Environment& env, const ServiceProfile& profile,
                                       const BehaviorModel& behavior, int n_subjects,
                                       std::uint64_t seed, double service_dummy = 0.0,
                                       double retrans_pkts_per_s = -1.0);

struct CellData {
  std::string service_id;
  std::string environment_id;
  PacketTrace trace;
  std::vector<SessionLog> sessions;
};

struct StudyBundle {
  std::uint64_t seed = 0;
  std::vector<CellData> cells;  // service-major, config order
};

// Full grid: synthesizes each cell's trace, measures its retransmission
// rate, and drives the planted session responses off that measurement.
StudyBundle run_study(const StudyConfig& config, const SimSettings& settings, std::uint64_t seed);

}  // namespace webqoe::sim
