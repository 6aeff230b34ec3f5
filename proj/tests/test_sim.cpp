#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "webqoe/core/study_config.hpp"
#include "webqoe/core/trace_io.hpp"
#include "webqoe/errors.hpp"
#include "webqoe/qos/metrics.hpp"
#include "webqoe/sim/prng.hpp"
#include "webqoe/sim/simulator.hpp"

using namespace webqoe;
using sim::SimMode;

TEST_CASE("generator reproduces the published splitmix64 stream") {
  // Reference outputs for seed 0 from the original public-domain
  // implementation (Vigna, 2015).
  sim::SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFull);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ull);
  CHECK(rng.next() == 0x06C45D188009454Full);
}

TEST_CASE("uniform draws live strictly inside the unit interval") {
  sim::SplitMix64 rng(123);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform_open01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform mean is near one half") {
  sim::SplitMix64 rng(7);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += rng.uniform_open01();
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal draws have the requested moments") {
  sim::SplitMix64 rng(99);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(3.0, 2.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(mean == doctest::Approx(3.0).epsilon(0.01));
  CHECK(var == doctest::Approx(4.0).epsilon(0.03));
}

TEST_CASE("derived seeds separate streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 100; ++s) seen.insert(sim::derive_seed(42, s));
  CHECK(seen.size() == 100);
  CHECK(sim::derive_seed(42, 0) != sim::derive_seed(43, 0));
  // Pure function of its arguments.
  CHECK(sim::derive_seed(42, 7) == sim::derive_seed(42, 7));
}

TEST_CASE("deterministic traces carry no retransmissions and exact RTT") {
  StudyConfig config = default_study_config();
  auto profiles = sim::default_profiles(config.services);
  for (const Environment& env : config.environments) {
    PacketTrace t = sim::synth_trace(env, profiles[0], 5, SimMode::Deterministic);
    qos::QosSummary s = qos::summarize(t);
    CHECK(s.retransmitted_segments == 0);
    CHECK(s.measured_loss_rate == 0.0);
    CHECK(s.handshake_rtt_ms.mean == 20.0 + env.added_rtt_ms);  // exact
    CHECK(s.handshake_rtt_ms.ci_low == s.handshake_rtt_ms.ci_high);
    CHECK(s.allseg_rtt_ms.mean == 20.0 + env.added_rtt_ms);
  }
}

TEST_CASE("handshake RTT stays exact under loss") {
  Environment env{"5", 200.0, 0.10};
  auto profiles = sim::default_profiles({"ServiceA"});
  PacketTrace t = sim::synth_trace(env, profiles[0], 17, SimMode::Stochastic);
  qos::QosSummary s = qos::summarize(t);
  CHECK(s.handshake_rtt_ms.mean == 220.0);
  CHECK(s.retransmitted_segments > 0);
}

TEST_CASE("traces are bit-identical across repeated synthesis") {
  Environment env{"4", 150.0, 0.05};
  auto profiles = sim::default_profiles({"ServiceA"});
  PacketTrace a = sim::synth_trace(env, profiles[0], 11, SimMode::Stochastic);
  PacketTrace b = sim::synth_trace(env, profiles[0], 11, SimMode::Stochastic);
  CHECK(trace_to_csv(a) == trace_to_csv(b));
  PacketTrace c = sim::synth_trace(env, profiles[0], 12, SimMode::Stochastic);
  CHECK(trace_to_csv(a) != trace_to_csv(c));
}

TEST_CASE("stochastic loss lands near the planted rate") {
  // One long page so the binomial has room: 2000 segments per page,
  // 5 pages -> 10000 data segments.
  Environment env{"3", 0.0, 0.05};
  sim::ServiceProfile profile;
  profile.service_id = "ServiceA";
  profile.segments_per_page = 2000;
  profile.pages_per_session = 5;
  int within = 0;
  const int trials = 20;
  for (int i = 0; i < trials; ++i) {
    PacketTrace t = sim::synth_trace(env, profile, 1000 + i, SimMode::Stochastic);
    qos::QosSummary s = qos::summarize(t);
    // 3 sigma of Binomial(10000, 0.05)/10000 is about 0.0065.
    if (std::fabs(s.measured_loss_rate - 0.05) < 0.007) ++within;
  }
  CHECK(within >= trials - 1);
}

TEST_CASE("invalid environments and profiles are rejected") {
  auto profiles = sim::default_profiles({"ServiceA"});
  CHECK_THROWS_AS(sim::synth_trace({"x", -1.0, 0.0}, profiles[0], 1, SimMode::Deterministic),
                  ValidationError);
  CHECK_THROWS_AS(sim::synth_trace({"x", 0.0, 1.0}, profiles[0], 1, SimMode::Stochastic),
                  ValidationError);

  sim::ServiceProfile bad = profiles[0];
  bad.segments_per_page = 0;
  CHECK_THROWS_AS(sim::synth_trace({"1", 0.0, 0.0}, bad, 1, SimMode::Deterministic),
                  ValidationError);
}

TEST_CASE("sessions are deterministic and well-formed") {
  Environment env{"2", 150.0, 0.0};
  auto profiles = sim::default_profiles({"ServiceA"});
  sim::BehaviorModel behavior;
  auto a = sim::synth_sessions(env, profiles[0], behavior, 35, 9, 0.0, 2.0);
  auto b = sim::synth_sessions(env, profiles[0], behavior, 35, 9, 0.0, 2.0);
  REQUIRE(a.size() == 35);
  CHECK(a[0].subject_id == "s001");
  CHECK(a[34].subject_id == "s035");
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rating >= 1);
    CHECK(a[i].rating <= 7);
    CHECK(a[i].conditions.size() == 6);
    CHECK(a[i].wheel_spins >= 0.0);
    CHECK(a[i].rating == b[i].rating);
    CHECK(a[i].wheel_spins == b[i].wheel_spins);
  }
}

TEST_CASE("planted behavior responds to the retransmission rate") {
  Environment env{"1", 0.0, 0.0};
  auto profiles = sim::default_profiles({"ServiceA"});
  sim::BehaviorModel behavior;
  // Average achievement over many subjects tracks the planted line.
  auto calm = sim::synth_sessions(env, profiles[0], behavior, 4000, 3, 0.0, 0.0);
  auto stressed = sim::synth_sessions(env, profiles[0], behavior, 4000, 3, 0.0, 20.0);
  auto mean_achieved = [](const std::vector<SessionLog>& sessions) {
    double sum = 0.0;
    for (const SessionLog& s : sessions) {
      int got = 0;
      for (const ConditionOutcome& c : s.conditions) got += c.achieved ? 1 : 0;
      sum += got / 6.0;
    }
    return sum / sessions.size();
  };
  CHECK(mean_achieved(calm) == doctest::Approx(0.98).epsilon(0.01));
  CHECK(mean_achieved(stressed) == doctest::Approx(0.98 - 0.012 * 20.0).epsilon(0.02));

  // Ratings drop with the retransmission rate too.
  auto mean_rating = [](const std::vector<SessionLog>& sessions) {
    double sum = 0.0;
    for (const SessionLog& s : sessions) sum += s.rating;
    return sum / sessions.size();
  };
  CHECK(mean_rating(calm) > mean_rating(stressed));
}

TEST_CASE("run_study produces one cell per service and environment") {
  StudyConfig config = default_study_config();
  sim::SimSettings settings;
  settings.n_subjects = 3;
  settings.mode = SimMode::Deterministic;
  settings.profiles = sim::default_profiles(config.services);
  sim::StudyBundle bundle = sim::run_study(config, settings, 1);
  REQUIRE(bundle.cells.size() == 10);
  CHECK(bundle.cells[0].service_id == "ServiceA");
  CHECK(bundle.cells[0].environment_id == "1");
  CHECK(bundle.cells[9].service_id == "ServiceB");
  CHECK(bundle.cells[9].environment_id == "5");
  for (const sim::CellData& cell : bundle.cells) {
    CHECK(cell.sessions.size() == 3);
    CHECK(!cell.trace.records.empty());
    for (const SessionLog& s : cell.sessions) {
      CHECK(s.service_id == cell.service_id);
      CHECK(s.environment_id == cell.environment_id);
    }
  }
}

TEST_CASE("settings parse from the config document") {
  StudyConfig config = default_study_config();
  nlohmann::json root = study_config_to_json(config);
  root["simulator"] = {{"n_subjects", 5},
                       {"mode", "Deterministic"},
                       {"behavior", {{"mean_clicks", 50.0}}}};
  sim::SimSettings s = sim::settings_from_config_json(root, config);
  CHECK(s.n_subjects == 5);
  CHECK(s.mode == SimMode::Deterministic);
  CHECK(s.behavior.mean_clicks == 50.0);
  CHECK(s.behavior.mean_keystrokes == 40.0);  // untouched default
  REQUIRE(s.profiles.size() == 2);
  CHECK(s.profiles[0].mean_segment_len == 1200.0);
  CHECK(s.profiles[1].mean_segment_len == 1000.0);

  root["simulator"]["n_subjects"] = 0;
  CHECK_THROWS_AS(sim::settings_from_config_json(root, config), ValidationError);
}

TEST_CASE("whole-study synthesis is reproducible") {
  StudyConfig config = default_study_config();
  config.services = {"ServiceA"};
  config.environments = {{"1", 0.0, 0.0}, {"5", 200.0, 0.10}};
  sim::SimSettings settings;
  settings.n_subjects = 5;
  settings.profiles = sim::default_profiles(config.services);
  sim::StudyBundle a = sim::run_study(config, settings, 77);
  sim::StudyBundle b = sim::run_study(config, settings, 77);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(trace_to_csv(a.cells[i].trace) == trace_to_csv(b.cells[i].trace));
    REQUIRE(a.cells[i].sessions.size() == b.cells[i].sessions.size());
    for (std::size_t j = 0; j < a.cells[i].sessions.size(); ++j) {
      CHECK(a.cells[i].sessions[j].rating == b.cells[i].sessions[j].rating);
      CHECK(a.cells[i].sessions[j].mouse_distance == b.cells[i].sessions[j].mouse_distance);
    }
  }
}
