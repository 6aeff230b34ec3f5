#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "webqoe/core/types.hpp"

namespace webqoe::usability {

struct EffectivenessInput {
  PriorityWeights weights;
  std::array<std::int64_t, 3> totals{};               // C_p, indexed High, Mid, Low
  std::vector<std::array<std::int64_t, 3>> achieved;  // c_p per user, same indexing
};

// Weighted mean achievement ratio over users. Terms accumulate per user in
// Low, Mid, High order: with weights summing to 1 this makes the
// full-achievement result exactly 1.0 in IEEE double arithmetic.
double effectiveness(const EffectivenessInput& input);

// Mean per-session interaction load for one cell.
double workload(std::span<const SessionLog> sessions, const WorkloadCoefficients& coeffs,
                WorkloadMode mode);

// H = E / W; throws ZeroWorkload at W = 0.
double efficiency(double e, double w);

struct UsabilityScores {
  std::string service_id;
  std::string environment_id;
  double e = 0.0;
  double w = 0.0;
  double h = 0.0;
  std::optional<double> s;  // filled by the satisfaction scaling step
};

// Per-user achievement ratio (the inner sum of the effectiveness formula).
double user_achievement(const SessionLog& session, const PriorityWeights& weights);

// Groups sessions into (service, environment) cells and computes E, W, H per
// cell, ordered by the config's service and environment order.
std::vector<UsabilityScores> cell_scores(std::span<const SessionLog> sessions,
                                         const StudyConfig& config);

std::string scores_to_csv(std::span<const UsabilityScores> rows);
std::vector<UsabilityScores> scores_from_csv(const std::string& content);

}  // namespace webqoe::usability
