#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <random>

#include "doctest.h"
#include "webqoe/core/study_config.hpp"
#include "webqoe/errors.hpp"
#include "webqoe/usability/scores.hpp"

using namespace webqoe;
using usability::EffectivenessInput;

namespace {

constexpr std::size_t H = static_cast<std::size_t>(Priority::High);
constexpr std::size_t M = static_cast<std::size_t>(Priority::Mid);
constexpr std::size_t L = static_cast<std::size_t>(Priority::Low);

// Brute-force evaluation in textbook order, independent of the library's
// accumulation strategy.
double effectiveness_oracle(const EffectivenessInput& in) {
  double sum = 0.0;
  const double weights[3] = {in.weights.high, in.weights.mid, in.weights.low};
  for (const auto& user : in.achieved) {
    for (std::size_t p = 0; p < 3; ++p) {
      if (in.totals[p] == 0) continue;
      sum += weights[p] * static_cast<double>(user[p]) / static_cast<double>(in.totals[p]);
    }
  }
  return sum / static_cast<double>(in.achieved.size());
}

SessionLog make_session(const std::string& subject, const std::string& svc,
                        const std::string& env, double spins, double mouse, std::int64_t clicks,
                        std::int64_t keys) {
  SessionLog s;
  s.subject_id = subject;
  s.service_id = svc;
  s.environment_id = env;
  s.wheel_spins = spins;
  s.mouse_distance = mouse;
  s.clicks = clicks;
  s.keystrokes = keys;
  s.conditions = {{Priority::High, true}, {Priority::High, true}, {Priority::Mid, true},
                  {Priority::Mid, true},  {Priority::Low, true},  {Priority::Low, true}};
  s.rating = 4;
  return s;
}

}  // namespace

TEST_CASE("effectiveness matches the hand-worked single-user case") {
  EffectivenessInput in;
  in.totals = {2, 2, 2};
  in.achieved = {{1, 2, 0}};
  CHECK(usability::effectiveness(in) == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("full achievement is exactly one") {
  EffectivenessInput in;
  in.totals = {3, 4, 5};
  in.achieved.assign(35, {3, 4, 5});
  CHECK(usability::effectiveness(in) == 1.0);  // exact, by accumulation order
}

TEST_CASE("no achievement is exactly zero") {
  EffectivenessInput in;
  in.totals = {2, 2, 2};
  in.achieved.assign(5, {0, 0, 0});
  CHECK(usability::effectiveness(in) == 0.0);
}

TEST_CASE("effectiveness agrees with a brute-force oracle") {
  std::mt19937_64 rng(20250816);
  for (int trial = 0; trial < 1000; ++trial) {
    EffectivenessInput in;
    for (std::size_t p = 0; p < 3; ++p) in.totals[p] = 1 + static_cast<std::int64_t>(rng() % 6);
    const std::size_t users = 1 + rng() % 40;
    for (std::size_t i = 0; i < users; ++i) {
      std::array<std::int64_t, 3> c{};
      for (std::size_t p = 0; p < 3; ++p) {
        c[p] = static_cast<std::int64_t>(rng() % (in.totals[p] + 1));
      }
      in.achieved.push_back(c);
    }
    CHECK(usability::effectiveness(in) ==
          doctest::Approx(effectiveness_oracle(in)).epsilon(1e-12));
  }
}

TEST_CASE("effectiveness monotonicity and bounds") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    EffectivenessInput in;
    for (std::size_t p = 0; p < 3; ++p) in.totals[p] = 1 + static_cast<std::int64_t>(rng() % 4);
    for (std::size_t i = 0; i < 1 + rng() % 8; ++i) {
      std::array<std::int64_t, 3> c{};
      for (std::size_t p = 0; p < 3; ++p) {
        c[p] = static_cast<std::int64_t>(rng() % (in.totals[p] + 1));
      }
      in.achieved.push_back(c);
    }
    const double base = usability::effectiveness(in);
    CHECK(base >= 0.0);
    CHECK(base <= 1.0);

    // Raise one count; E must not decrease.
    EffectivenessInput bumped = in;
    const std::size_t user = rng() % bumped.achieved.size();
    const std::size_t prio = rng() % 3;
    if (bumped.achieved[user][prio] < bumped.totals[prio]) {
      bumped.achieved[user][prio]++;
      CHECK(usability::effectiveness(bumped) >= base);
    }
  }
}

TEST_CASE("effectiveness is invariant under user permutation") {
  EffectivenessInput in;
  in.totals = {3, 3, 3};
  in.achieved = {{0, 1, 2}, {3, 2, 1}, {1, 1, 1}, {2, 0, 3}};
  const double base = usability::effectiveness(in);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(in.achieved.begin(), in.achieved.end(), rng);
    CHECK(usability::effectiveness(in) == base);
  }
}

TEST_CASE("effectiveness failure modes") {
  EffectivenessInput empty;
  empty.totals = {1, 1, 1};
  CHECK_THROWS_AS(usability::effectiveness(empty), ValidationError);

  EffectivenessInput zero_total;
  zero_total.totals = {0, 2, 2};  // High has weight 0.6 but no conditions
  zero_total.achieved = {{0, 1, 1}};
  CHECK_THROWS_AS(usability::effectiveness(zero_total), DegenerateTotals);

  EffectivenessInput overcount;
  overcount.totals = {2, 2, 2};
  overcount.achieved = {{3, 0, 0}};
  CHECK_THROWS_AS(usability::effectiveness(overcount), ValidationError);

  EffectivenessInput negative;
  negative.totals = {2, 2, 2};
  negative.achieved = {{-1, 0, 0}};
  CHECK_THROWS_AS(usability::effectiveness(negative), ValidationError);
}

TEST_CASE("zero-weight priorities may have zero totals") {
  EffectivenessInput in;
  in.weights = {1.0, 0.0, 0.0};
  in.totals = {2, 0, 0};
  in.achieved = {{1, 0, 0}};
  CHECK(usability::effectiveness(in) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("workload evaluates both combination modes") {
  std::vector<SessionLog> one = {make_session("s001", "ServiceA", "1", 2.0, 0.5, 10, 30)};
  WorkloadCoefficients coeffs;  // 100, 10000, 20, 20
  CHECK(usability::workload(one, coeffs, WorkloadMode::ProductAsPrinted) ==
        doctest::Approx(6000.0).epsilon(1e-12));
  CHECK(usability::workload(one, coeffs, WorkloadMode::RateNormalized) ==
        doctest::Approx(2.02005).epsilon(1e-12));

  // Mean over sessions.
  std::vector<SessionLog> two = one;
  two.push_back(make_session("s002", "ServiceA", "1", 0.0, 0.0, 0, 0));
  CHECK(usability::workload(two, coeffs, WorkloadMode::ProductAsPrinted) ==
        doctest::Approx(3000.0).epsilon(1e-12));

  CHECK_THROWS_AS(usability::workload({}, coeffs, WorkloadMode::ProductAsPrinted), EmptyCell);
}

TEST_CASE("workload scales linearly in the interaction counts") {
  WorkloadCoefficients coeffs;
  std::vector<SessionLog> base = {make_session("s001", "ServiceA", "1", 3.0, 0.2, 7, 11),
                                  make_session("s002", "ServiceA", "1", 1.0, 0.9, 2, 5)};
  for (WorkloadMode mode : {WorkloadMode::ProductAsPrinted, WorkloadMode::RateNormalized}) {
    const double w = usability::workload(base, coeffs, mode);
    std::vector<SessionLog> scaled = base;
    for (SessionLog& s : scaled) {
      s.wheel_spins *= 4.0;
      s.mouse_distance *= 4.0;
      s.clicks *= 4;
      s.keystrokes *= 4;
    }
    CHECK(usability::workload(scaled, coeffs, mode) == doctest::Approx(4.0 * w).epsilon(1e-12));
  }
}

TEST_CASE("efficiency is the quotient with a guarded denominator") {
  CHECK(usability::efficiency(1.0, 1.0) == 1.0);
  CHECK(usability::efficiency(0.9, 5.0) == doctest::Approx(0.18).epsilon(1e-15));
  CHECK(usability::efficiency(0.0, 3.0) == 0.0);
  CHECK_THROWS_AS(usability::efficiency(0.5, 0.0), ZeroWorkload);
}

TEST_CASE("cell scores group by service and environment in config order") {
  StudyConfig config = default_study_config();
  std::vector<SessionLog> sessions;
  for (const std::string& svc : config.services) {
    for (const Environment& env : config.environments) {
      sessions.push_back(make_session("s001", svc, env.id, 2.0, 0.5, 10, 30));
      sessions.push_back(make_session("s002", svc, env.id, 2.0, 0.5, 10, 30));
    }
  }
  // Shuffle: output order must come from the config, not the input.
  std::mt19937_64 rng(3);
  std::shuffle(sessions.begin(), sessions.end(), rng);

  auto scores = usability::cell_scores(sessions, config);
  REQUIRE(scores.size() == 10);
  CHECK(scores[0].service_id == "ServiceA");
  CHECK(scores[0].environment_id == "1");
  CHECK(scores[9].service_id == "ServiceB");
  CHECK(scores[9].environment_id == "5");
  for (const auto& row : scores) {
    CHECK(row.e == 1.0);
    CHECK(row.w == doctest::Approx(6000.0).epsilon(1e-12));
    CHECK(row.h == doctest::Approx(1.0 / 6000.0).epsilon(1e-12));
    CHECK(!row.s.has_value());
  }
}

TEST_CASE("cell scores enforce consistent condition layouts") {
  StudyConfig config = default_study_config();
  config.services = {"ServiceA"};
  config.environments = {{"1", 0.0, 0.0}};
  SessionLog a = make_session("s001", "ServiceA", "1", 1, 1, 1, 1);
  SessionLog b = make_session("s002", "ServiceA", "1", 1, 1, 1, 1);
  b.conditions.push_back({Priority::Low, true});  // different split
  CHECK_THROWS_AS(usability::cell_scores(std::vector<SessionLog>{a, b}, config),
                  InconsistentConditions);

  // Unknown label.
  SessionLog c = make_session("s003", "Ghost", "1", 1, 1, 1, 1);
  CHECK_THROWS_AS(usability::cell_scores(std::vector<SessionLog>{c}, config), ValidationError);
}

TEST_CASE("per-user achievement feeds the aggregate") {
  PriorityWeights w;
  SessionLog s = make_session("s001", "ServiceA", "1", 1, 1, 1, 1);
  s.conditions = {{Priority::High, true},  {Priority::High, false}, {Priority::Mid, true},
                  {Priority::Mid, true},   {Priority::Low, false},  {Priority::Low, false}};
  CHECK(usability::user_achievement(s, w) == doctest::Approx(0.6 * 0.5 + 0.3).epsilon(1e-15));
}

TEST_CASE("scores CSV round-trip preserves optional satisfaction") {
  std::vector<usability::UsabilityScores> rows = {
      {"ServiceA", "1", 0.99, 6000.0, 0.000165, 0.7},
      {"ServiceB", "5", 0.80, 7000.0, 0.000114, std::nullopt},
  };
  const std::string text = usability::scores_to_csv(rows);
  CHECK(text.rfind("service,environment,E,W,H,S\n", 0) == 0);
  auto back = usability::scores_from_csv(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].s.has_value());
  CHECK(*back[0].s == 0.7);
  CHECK(!back[1].s.has_value());
  CHECK(usability::scores_to_csv(back) == text);
}
