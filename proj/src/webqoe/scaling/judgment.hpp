#pragma once

#include <array>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "webqoe/core/types.hpp"
#include "webqoe/usability/scores.hpp"

namespace webqoe::scaling {

struct RatingMatrix {
  std::vector<TraceLabel> stimuli;         // (service, environment) per row
  std::vector<std::array<int, 7>> counts;  // category frequencies per row
  int raters_per_stimulus = 0;
};

RatingMatrix matrix_from_ratings(std::span<const RatingRow> ratings, const StudyConfig& config);
RatingMatrix matrix_from_sessions(std::span<const SessionLog> sessions, const StudyConfig& config);

// P_jk for k = 1..6: fraction of raters at or below category k.
std::vector<std::array<double, 6>> cumulative_proportions(const RatingMatrix& m);

enum class ClipPolicy {
  ClipToEpsilon,  // clamp 0/1 proportions into [eps, 1-eps], eps = 1/(2n)
  DropExtremes,   // leave 0/1 cells out of the fit
};

struct ScaleResult {
  std::vector<double> scale_values;     // S_j, shifted so the minimum is 0
  std::array<double, 6> boundaries{};   // t_k on the same shifted scale
  int clipped_cells = 0;
};

// Least-squares solution of z_jk = t_k - S_j under equal dispersions
// (categorical judgment, Condition D), with the smallest scale value as
// the origin.
ScaleResult fit_scale(const RatingMatrix& m, ClipPolicy policy = ClipPolicy::ClipToEpsilon);

// Fills the S column of score rows from a fitted scale; stimuli must match
// the rows one to one.
std::vector<usability::UsabilityScores> satisfaction(std::vector<usability::UsabilityScores> scores,
                                                     const RatingMatrix& m);

nlohmann::ordered_json scale_to_json(const ScaleResult& result, const RatingMatrix& m);

}  // namespace webqoe::scaling
