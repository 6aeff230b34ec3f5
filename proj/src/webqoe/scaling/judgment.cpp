#include "webqoe/scaling/judgment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "webqoe/errors.hpp"
#include "webqoe/scaling/probit.hpp"

namespace webqoe::scaling {

namespace {

void validate_matrix(const RatingMatrix& m) {
  if (m.stimuli.size() != m.counts.size()) {
    throw ValidationError("rating matrix: stimuli and counts sizes differ");
  }
  if (m.raters_per_stimulus <= 0) {
    throw ValidationError("rating matrix: rater count must be positive");
  }
  for (std::size_t j = 0; j < m.counts.size(); ++j) {
    int sum = 0;
    for (int c : m.counts[j]) {
      if (c < 0) throw ValidationError("rating matrix: negative count");
      sum += c;
    }
    if (sum != m.raters_per_stimulus) {
      throw ValidationError("rating matrix: row " + std::to_string(j) + " sums to " +
                            std::to_string(sum) + ", expected " +
                            std::to_string(m.raters_per_stimulus));
    }
  }
}

RatingMatrix matrix_from_rows(std::span<const RatingRow> ratings, const StudyConfig& config) {
  std::set<std::string> services(config.services.begin(), config.services.end());
  std::set<std::string> envs;
  for (const Environment& e : config.environments) envs.insert(e.id);

  std::map<std::pair<std::string, std::string>, std::array<int, 7>> cells;
  for (const RatingRow& r : ratings) {
    if (!services.contains(r.service_id)) {
      throw ValidationError("ratings: unknown service \"" + r.service_id + "\"");
    }
    if (!envs.contains(r.environment_id)) {
      throw ValidationError("ratings: unknown environment \"" + r.environment_id + "\"");
    }
    if (r.rating < 1 || r.rating > 7) {
      throw ValidationError("ratings: rating outside 1..7");
    }
    ++cells[{r.service_id, r.environment_id}][r.rating - 1];
  }

  RatingMatrix m;
  int raters = -1;
  for (const std::string& svc : config.services) {
    for (const Environment& env : config.environments) {
      auto it = cells.find({svc, env.id});
      if (it == cells.end()) continue;
      int sum = 0;
      for (int c : it->second) sum += c;
      if (raters < 0) {
        raters = sum;
      } else if (sum != raters) {
        throw ValidationError("ratings: cell (" + svc + ", " + env.id + ") has " +
                              std::to_string(sum) + " raters, expected " + std::to_string(raters));
      }
      m.stimuli.push_back({svc, env.id});
      m.counts.push_back(it->second);
    }
  }
  m.raters_per_stimulus = std::max(raters, 0);
  return m;
}

}  // namespace

RatingMatrix matrix_from_ratings(std::span<const RatingRow> ratings, const StudyConfig& config) {
  return matrix_from_rows(ratings, config);
}

RatingMatrix matrix_from_sessions(std::span<const SessionLog> sessions,
                                  const StudyConfig& config) {
  std::vector<RatingRow> rows;
  rows.reserve(sessions.size());
  for (const SessionLog& s : sessions) {
    rows.push_back({s.subject_id, s.service_id, s.environment_id, s.rating});
  }
  return matrix_from_rows(rows, config);
}

std::vector<std::array<double, 6>> cumulative_proportions(const RatingMatrix& m) {
  validate_matrix(m);
  std::vector<std::array<double, 6>> out;
  out.reserve(m.counts.size());
  const double n = m.raters_per_stimulus;
  for (const auto& row : m.counts) {
    std::array<double, 6> p{};
    int cum = 0;
    for (int k = 0; k < 6; ++k) {
      cum += row[k];
      p[k] = static_cast<double>(cum) / n;
    }
    out.push_back(p);
  }
  return out;
}

ScaleResult fit_scale(const RatingMatrix& m, ClipPolicy policy) {
  validate_matrix(m);
  const std::size_t stimuli = m.stimuli.size();
  if (stimuli < 2) throw DegenerateMatrix("fit_scale: need at least 2 stimuli");

  const auto proportions = cumulative_proportions(m);
  const double eps = 1.0 / (2.0 * m.raters_per_stimulus);

  ScaleResult result;
  std::vector<std::array<double, 6>> z(stimuli);
  std::vector<std::array<bool, 6>> usable(stimuli);
  for (std::size_t j = 0; j < stimuli; ++j) {
    int usable_count = 0;
    for (int k = 0; k < 6; ++k) {
      double p = proportions[j][k];
      if (policy == ClipPolicy::ClipToEpsilon) {
        const double clamped = std::clamp(p, eps, 1.0 - eps);
        if (clamped != p) {
          p = clamped;
          ++result.clipped_cells;
        }
        usable[j][k] = true;
      } else {
        usable[j][k] = p > 0.0 && p < 1.0;
      }
      z[j][k] = usable[j][k] ? probit(p) : 0.0;
      if (usable[j][k]) ++usable_count;
    }
    if (usable_count == 0) {
      throw DegenerateMatrix("fit_scale: stimulus " + std::to_string(j) +
                             " has no usable boundary");
    }
  }

  // Column means give initial boundaries; the scale values are the mean
  // offsets; one Gauss-Seidel sweep re-centers boundaries when cells were
  // dropped (a no-op up to a constant for complete matrices).
  std::array<double, 6> t{};
  std::array<int, 6> col_n{};
  for (int k = 0; k < 6; ++k) {
    for (std::size_t j = 0; j < stimuli; ++j) {
      if (usable[j][k]) {
        t[k] += z[j][k];
        ++col_n[k];
      }
    }
    if (col_n[k] > 0) t[k] /= col_n[k];
  }

  auto scale_from_boundaries = [&](const std::array<double, 6>& bounds) {
    std::vector<double> s(stimuli, 0.0);
    for (std::size_t j = 0; j < stimuli; ++j) {
      double sum = 0.0;
      int cnt = 0;
      for (int k = 0; k < 6; ++k) {
        if (usable[j][k] && col_n[k] > 0) {
          sum += bounds[k] - z[j][k];
          ++cnt;
        }
      }
      s[j] = sum / cnt;
    }
    return s;
  };

  std::vector<double> s = scale_from_boundaries(t);
  for (int k = 0; k < 6; ++k) {
    if (col_n[k] == 0) continue;
    double sum = 0.0;
    for (std::size_t j = 0; j < stimuli; ++j) {
      if (usable[j][k]) sum += z[j][k] + s[j];
    }
    t[k] = sum / col_n[k];
  }
  s = scale_from_boundaries(t);

  const double origin = *std::min_element(s.begin(), s.end());
  for (double& v : s) v -= origin;
  for (int k = 0; k < 6; ++k) {
    t[k] = col_n[k] > 0 ? t[k] - origin : std::numeric_limits<double>::quiet_NaN();
  }

  result.scale_values = std::move(s);
  result.boundaries = t;
  return result;
}

std::vector<usability::UsabilityScores> satisfaction(
    std::vector<usability::UsabilityScores> scores, const RatingMatrix& m) {
  if (scores.size() != m.stimuli.size()) {
    throw LabelMismatch("satisfaction: " + std::to_string(scores.size()) + " score rows vs " +
                        std::to_string(m.stimuli.size()) + " stimuli");
  }
  const ScaleResult fitted = fit_scale(m);
  for (usability::UsabilityScores& row : scores) {
    const TraceLabel want{row.service_id, row.environment_id};
    bool found = false;
    for (std::size_t j = 0; j < m.stimuli.size(); ++j) {
      if (m.stimuli[j] == want) {
        row.s = fitted.scale_values[j];
        found = true;
        break;
      }
    }
    if (!found) {
      throw LabelMismatch("satisfaction: no stimulus for cell (" + row.service_id + ", " +
                          row.environment_id + ")");
    }
  }
  return scores;
}

nlohmann::ordered_json scale_to_json(const ScaleResult& result, const RatingMatrix& m) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json stimuli = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.stimuli.size(); ++i) {
    nlohmann::ordered_json row;
    row["service_id"] = m.stimuli[i].service_id;
    row["environment_id"] = m.stimuli[i].environment_id;
    row["s"] = result.scale_values[i];
    stimuli.push_back(std::move(row));
  }
  j["stimuli"] = std::move(stimuli);
  j["boundaries"] = result.boundaries;
  j["clipped_cells"] = result.clipped_cells;
  j["raters_per_stimulus"] = m.raters_per_stimulus;
  return j;
}

}  // namespace webqoe::scaling
