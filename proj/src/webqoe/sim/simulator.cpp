#include "webqoe/sim/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <utility>

#include "webqoe/core/study_config.hpp"
#include "webqoe/errors.hpp"
#include "webqoe/qos/metrics.hpp"
#include "webqoe/sim/prng.hpp"

namespace webqoe::sim {

namespace {

constexpr std::uint32_t kIsnUp = 1000;
constexpr std::uint32_t kIsnDown = 2000;
constexpr std::uint32_t kRequestLen = 300;
constexpr std::int64_t kSegmentGapUs = 1000;
constexpr std::int64_t kThinkTimeUs = 50000;
constexpr std::array<double, 6> kRatingBoundaries = {-2.5, -1.5, -0.5, 0.5, 1.5, 2.5};

void check_profile(const ServiceProfile& p) {
  if (p.base_rtt_ms <= 0 || p.mean_segment_len <= 0 || p.segments_per_page <= 0 ||
      p.pages_per_session <= 0 || p.rto_ms <= 0) {
    throw ValidationError("service profile \"" + p.service_id + "\": all fields must be positive");
  }
}

void check_env(const Environment& env) {
  if (env.added_rtt_ms < 0) throw ValidationError("environment: added_rtt_ms is negative");
  if (env.added_loss_rate < 0 || env.added_loss_rate > 1) {
    throw ValidationError("environment: added_loss_rate outside [0,1]");
  }
}

LinearEffect effect_from_json(const nlohmann::json& j, const LinearEffect& defaults) {
  LinearEffect e = defaults;
  e.intercept = j.value("intercept", e.intercept);
  e.per_retrans = j.value("per_retrans", e.per_retrans);
  e.per_service = j.value("per_service", e.per_service);
  return e;
}

nlohmann::ordered_json effect_to_json(const LinearEffect& e) {
  nlohmann::ordered_json j;
  j["intercept"] = e.intercept;
  j["per_retrans"] = e.per_retrans;
  j["per_service"] = e.per_service;
  return j;
}

}  // namespace

std::vector<ServiceProfile> default_profiles(const std::vector<std::string>& services) {
  std::vector<ServiceProfile> out;
  for (std::size_t i = 0; i < services.size(); ++i) {
    ServiceProfile p;
    p.service_id = services[i];
    p.mean_segment_len = i == 0 ? 1200.0 : 1000.0;
    out.push_back(std::move(p));
  }
  return out;
}

SimSettings settings_from_config_json(const nlohmann::json& config_root,
                                      const StudyConfig& config) {
  SimSettings s;
  s.profiles = default_profiles(config.services);
  if (!config_root.is_object() || !config_root.contains("simulator")) return s;
  const nlohmann::json& j = config_root.at("simulator");
  try {
    s.n_subjects = j.value("n_subjects", s.n_subjects);
    if (j.contains("mode")) {
      const auto mode = j.at("mode").get<std::string>();
      if (mode == "Deterministic") {
        s.mode = SimMode::Deterministic;
      } else if (mode == "Stochastic") {
        s.mode = SimMode::Stochastic;
      } else {
        throw ValidationError("simulator.mode: expected Deterministic or Stochastic, got \"" +
                              mode + "\"");
      }
    }
    if (j.contains("profiles")) {
      s.profiles.clear();
      for (const nlohmann::json& pj : j.at("profiles")) {
        ServiceProfile p;
        p.service_id = pj.at("service_id").get<std::string>();
        p.base_rtt_ms = pj.value("base_rtt_ms", p.base_rtt_ms);
        p.mean_segment_len = pj.value("mean_segment_len", p.mean_segment_len);
        p.segments_per_page = pj.value("segments_per_page", p.segments_per_page);
        p.pages_per_session = pj.value("pages_per_session", p.pages_per_session);
        p.rto_ms = pj.value("rto_ms", p.rto_ms);
        s.profiles.push_back(std::move(p));
      }
    }
    if (j.contains("behavior")) {
      const nlohmann::json& bj = j.at("behavior");
      BehaviorModel& b = s.behavior;
      if (bj.contains("achievement")) b.achievement = effect_from_json(bj.at("achievement"), b.achievement);
      if (bj.contains("latent_satisfaction")) {
        b.latent_satisfaction = effect_from_json(bj.at("latent_satisfaction"), b.latent_satisfaction);
      }
      if (bj.contains("effort")) b.effort = effect_from_json(bj.at("effort"), b.effort);
      b.rating_dispersion = bj.value("rating_dispersion", b.rating_dispersion);
      b.mean_wheel_spins = bj.value("mean_wheel_spins", b.mean_wheel_spins);
      b.mean_mouse_distance = bj.value("mean_mouse_distance", b.mean_mouse_distance);
      b.mean_clicks = bj.value("mean_clicks", b.mean_clicks);
      b.mean_keystrokes = bj.value("mean_keystrokes", b.mean_keystrokes);
      b.conditions_high = bj.value("conditions_high", b.conditions_high);
      b.conditions_mid = bj.value("conditions_mid", b.conditions_mid);
      b.conditions_low = bj.value("conditions_low", b.conditions_low);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("simulator settings: ") + e.what());
  }
  if (s.n_subjects < 1) throw ValidationError("simulator.n_subjects must be >= 1");
  return s;
}

nlohmann::ordered_json settings_to_json(const SimSettings& s) {
  nlohmann::ordered_json j;
  j["n_subjects"] = s.n_subjects;
  j["mode"] = s.mode == SimMode::Deterministic ? "Deterministic" : "Stochastic";
  nlohmann::ordered_json profiles = nlohmann::ordered_json::array();
  for (const ServiceProfile& p : s.profiles) {
    nlohmann::ordered_json pj;
    pj["service_id"] = p.service_id;
    pj["base_rtt_ms"] = p.base_rtt_ms;
    pj["mean_segment_len"] = p.mean_segment_len;
    pj["segments_per_page"] = p.segments_per_page;
    pj["pages_per_session"] = p.pages_per_session;
    pj["rto_ms"] = p.rto_ms;
    profiles.push_back(std::move(pj));
  }
  j["profiles"] = std::move(profiles);
  nlohmann::ordered_json bj;
  bj["achievement"] = effect_to_json(s.behavior.achievement);
  bj["latent_satisfaction"] = effect_to_json(s.behavior.latent_satisfaction);
  bj["effort"] = effect_to_json(s.behavior.effort);
  bj["rating_dispersion"] = s.behavior.rating_dispersion;
  bj["mean_wheel_spins"] = s.behavior.mean_wheel_spins;
  bj["mean_mouse_distance"] = s.behavior.mean_mouse_distance;
  bj["mean_clicks"] = s.behavior.mean_clicks;
  bj["mean_keystrokes"] = s.behavior.mean_keystrokes;
  bj["conditions_high"] = s.behavior.conditions_high;
  bj["conditions_mid"] = s.behavior.conditions_mid;
  bj["conditions_low"] = s.behavior.conditions_low;
  j["behavior"] = std::move(bj);
  return j;
}

PacketTrace synth_trace(const Environment& env, const ServiceProfile& profile,
                        std::uint64_t seed, SimMode mode) {
  check_profile(profile);
  check_env(env);
  const double q = mode == SimMode::Stochastic ? env.added_loss_rate : 0.0;
  if (q >= 1.0) {
    throw ValidationError("synth_trace: added_loss_rate 1 would never deliver a segment");
  }

  const std::int64_t rtt_us = std::llround((profile.base_rtt_ms + env.added_rtt_ms) * 1000.0);
  const std::int64_t rto_us = std::llround(profile.rto_ms * 1000.0);
  const auto seg_len = static_cast<std::uint32_t>(std::llround(profile.mean_segment_len));
  const int segs = profile.segments_per_page;

  SplitMix64 rng(seed);
  PacketTrace trace;
  std::int64_t page_start = 0;

  auto emit = [&trace](std::int64_t ts, std::uint64_t conn, Direction dir, std::uint32_t seq,
                       std::uint32_t ack, std::uint8_t flags, std::uint32_t len) {
    trace.records.push_back({ts, conn, dir, seq, ack, flags, len});
  };

  for (int page = 0; page < profile.pages_per_session; ++page) {
    const std::uint64_t conn = static_cast<std::uint64_t>(page) + 1;
    std::int64_t page_end = page_start;
    auto track = [&page_end](std::int64_t ts) { page_end = std::max(page_end, ts); };

    // Handshake; never lost, so its RTT mirrors the configured delays.
    emit(page_start, conn, Direction::Up, kIsnUp, 0, flag::Syn, 0);
    emit(page_start + rtt_us, conn, Direction::Down, kIsnDown, kIsnUp + 1,
         flag::Syn | flag::Ack, 0);
    track(page_start + rtt_us);

    // Client request, piggybacking the handshake ack. Attempts repeat after
    // the RTO until one is delivered.
    const std::uint32_t req_seq = kIsnUp + 1;
    const std::uint32_t req_end = req_seq + kRequestLen;
    std::int64_t attempt_ts = page_start + rtt_us;
    std::int64_t request_delivered_ts;
    while (true) {
      emit(attempt_ts, conn, Direction::Up, req_seq, kIsnDown + 1, flag::Ack | flag::Psh,
           kRequestLen);
      track(attempt_ts);
      if (!rng.bernoulli(q)) {
        request_delivered_ts = attempt_ts;
        break;
      }
      attempt_ts += rto_us;
    }

    // Server data segments, paced one per millisecond; each delivery is
    // acknowledged cumulatively one RTT after the delivering attempt.
    const std::int64_t response_start = request_delivered_ts + rtt_us;
    std::vector<std::pair<std::int64_t, int>> arrivals;  // (delivery ts, segment)
    for (int i = 0; i < segs; ++i) {
      const std::uint32_t seq = kIsnDown + 1 + static_cast<std::uint32_t>(i) * seg_len;
      std::int64_t send_ts = response_start + i * kSegmentGapUs;
      while (true) {
        emit(send_ts, conn, Direction::Down, seq, req_end, flag::Ack, seg_len);
        track(send_ts);
        if (!rng.bernoulli(q)) {
          arrivals.emplace_back(send_ts, i);
          break;
        }
        send_ts += rto_us;
      }
    }
    std::sort(arrivals.begin(), arrivals.end());

    std::vector<bool> received(static_cast<std::size_t>(segs), false);
    int next_missing = 0;
    for (const auto& [ts, i] : arrivals) {
      received[static_cast<std::size_t>(i)] = true;
      while (next_missing < segs && received[static_cast<std::size_t>(next_missing)]) {
        ++next_missing;
      }
      const std::uint32_t ack =
          kIsnDown + 1 + static_cast<std::uint32_t>(next_missing) * seg_len;
      emit(ts + rtt_us, conn, Direction::Up, req_end, ack, flag::Ack, 0);
      track(ts + rtt_us);
    }

    page_start = page_end + kThinkTimeUs;
  }

  std::stable_sort(trace.records.begin(), trace.records.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.ts_us < b.ts_us; });
  return trace;
}

std::vector<SessionLog> synth_sessions(const Environment& env, const ServiceProfile& profile,
                                       const BehaviorModel& behavior, int n_subjects,
                                       std::uint64_t seed, double service_dummy,
                                       double retrans_pkts_per_s) {
  check_profile(profile);
  check_env(env);
  if (n_subjects < 1) throw ValidationError("synth_sessions: n_subjects must be >= 1");
  if (behavior.rating_dispersion < 0) {
    throw ValidationError("synth_sessions: rating_dispersion must be >= 0");
  }
  if (behavior.conditions_high < 0 || behavior.conditions_mid < 0 ||
      behavior.conditions_low < 0 ||
      behavior.conditions_high + behavior.conditions_mid + behavior.conditions_low < 1) {
    throw ValidationError("synth_sessions: need at least one condition per session");
  }

  double t = retrans_pkts_per_s;
  if (t < 0.0) {
    // Coarse stand-in when no measured rate is supplied: expected
    // retransmissions per page over a loss-free page duration.
    const double q = env.added_loss_rate;
    const double rtt_ms = profile.base_rtt_ms + env.added_rtt_ms;
    const double page_ms = 2.0 * rtt_ms + profile.segments_per_page + 50.0;
    const double retrans_per_page =
        q < 1.0 ? (profile.segments_per_page + 1) * q / (1.0 - q) : 0.0;
    t = retrans_per_page / (page_ms / 1000.0);
  }

  const double x = service_dummy;
  const double p_ach = std::clamp(behavior.achievement.at(t, x), 0.0, 1.0);
  const double latent_mean = behavior.latent_satisfaction.at(t, x);
  const double effort = std::max(0.0, behavior.effort.at(t, x));

  std::vector<SessionLog> sessions;
  sessions.reserve(static_cast<std::size_t>(n_subjects));
  for (int i = 0; i < n_subjects; ++i) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    SessionLog s;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%03d", i + 1);
    s.subject_id = buf;
    s.service_id = profile.service_id;
    s.environment_id = env.id;

    auto add_conditions = [&](Priority p, int count) {
      for (int c = 0; c < count; ++c) s.conditions.push_back({p, rng.bernoulli(p_ach)});
    };
    add_conditions(Priority::High, behavior.conditions_high);
    add_conditions(Priority::Mid, behavior.conditions_mid);
    add_conditions(Priority::Low, behavior.conditions_low);

    auto positive_normal = [&rng](double mean) {
      return std::max(0.0, rng.normal(mean, 0.1 * mean));
    };
    s.wheel_spins = positive_normal(behavior.mean_wheel_spins * effort);
    s.mouse_distance = positive_normal(behavior.mean_mouse_distance * effort);
    s.clicks = std::llround(positive_normal(behavior.mean_clicks * effort));
    s.keystrokes = std::llround(positive_normal(behavior.mean_keystrokes * effort));

    const double latent = rng.normal(latent_mean, behavior.rating_dispersion);
    int rating = 1;
    for (double b : kRatingBoundaries) {
      if (b < latent) ++rating;
    }
    s.rating = rating;
    sessions.push_back(std::move(s));
  }
  return sessions;
}

StudyBundle run_study(const StudyConfig& config, const SimSettings& settings,
                      std::uint64_t seed) {
  const auto diags = validate_config(config);
  if (!diags.empty()) {
    std::string msg = "run_study: invalid config:";
    for (const std::string& d : diags) msg += "\n  " + d;
    throw ValidationError(msg);
  }

  auto profile_for = [&](const std::string& service) -> const ServiceProfile& {
    for (const ServiceProfile& p : settings.profiles) {
      if (p.service_id == service) return p;
    }
    throw ValidationError("run_study: no profile for service \"" + service + "\"");
  };

  StudyBundle bundle;
  bundle.seed = seed;
  std::uint64_t cell_index = 0;
  for (const std::string& svc : config.services) {
    const ServiceProfile& profile = profile_for(svc);
    for (const Environment& env : config.environments) {
      const std::uint64_t trace_seed = derive_seed(seed, cell_index * 2);
      const std::uint64_t session_seed = derive_seed(seed, cell_index * 2 + 1);
      ++cell_index;

      CellData cell;
      cell.service_id = svc;
      cell.environment_id = env.id;
      cell.trace = synth_trace(env, profile, trace_seed, settings.mode);
      cell.trace.label = {svc, env.id};

      // The planted responses react to the trace as measured, so the
      // regression stage sees a ground truth expressed in its own units.
      const double t = qos::summarize(cell.trace).retrans_pkts_per_s;
      const double x = svc == config.reference_service ? 0.0 : 1.0;
      cell.sessions = synth_sessions(env, profile, settings.behavior, settings.n_subjects,
                                     session_seed, x, t);
      bundle.cells.push_back(std::move(cell));
    }
  }
  return bundle;
}

}  // namespace webqoe::sim
