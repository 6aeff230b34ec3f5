#include "webqoe/usability/scores.hpp"

#include <map>
#include <set>
#include <sstream>

#include "webqoe/core/textio.hpp"
#include "webqoe/errors.hpp"

namespace webqoe::usability {

namespace {

constexpr std::array<Priority, 3> kAccumulationOrder = {Priority::Low, Priority::Mid,
                                                        Priority::High};

double user_term(const PriorityWeights& weights, const std::array<std::int64_t, 3>& totals,
                 const std::array<std::int64_t, 3>& achieved) {
  double term = 0.0;
  for (Priority p : kAccumulationOrder) {
    const std::size_t i = index_of(p);
    if (totals[i] == 0) continue;  // only reachable when the weight is zero
    term += weights.of(p) * (static_cast<double>(achieved[i]) / static_cast<double>(totals[i]));
  }
  return term;
}

std::array<std::int64_t, 3> condition_totals(const SessionLog& s) {
  std::array<std::int64_t, 3> totals{};
  for (const ConditionOutcome& c : s.conditions) ++totals[index_of(c.priority)];
  return totals;
}

std::array<std::int64_t, 3> condition_achieved(const SessionLog& s) {
  std::array<std::int64_t, 3> achieved{};
  for (const ConditionOutcome& c : s.conditions) {
    if (c.achieved) ++achieved[index_of(c.priority)];
  }
  return achieved;
}

}  // namespace

double effectiveness(const EffectivenessInput& input) {
  if (input.achieved.empty()) throw ValidationError("effectiveness: no users");
  for (Priority p : kAccumulationOrder) {
    const std::size_t i = index_of(p);
    if (input.totals[i] < 0) throw ValidationError("effectiveness: negative total");
    if (input.totals[i] == 0 && input.weights.of(p) != 0.0) {
      throw DegenerateTotals("effectiveness: zero conditions for a weighted priority");
    }
  }
  double sum = 0.0;
  for (const auto& achieved : input.achieved) {
    for (std::size_t i = 0; i < 3; ++i) {
      if (achieved[i] < 0 || achieved[i] > input.totals[i]) {
        throw ValidationError("effectiveness: achieved count outside [0, total]");
      }
    }
    sum += user_term(input.weights, input.totals, achieved);
  }
  return sum / static_cast<double>(input.achieved.size());
}

double workload(std::span<const SessionLog> sessions, const WorkloadCoefficients& coeffs,
                WorkloadMode mode) {
  if (sessions.empty()) throw EmptyCell("workload: no sessions in cell");
  if (coeffs.wheel_spin <= 0 || coeffs.mouse_distance <= 0 || coeffs.click <= 0 ||
      coeffs.keystroke <= 0) {
    throw ValidationError("workload: coefficients must be positive");
  }
  double sum = 0.0;
  for (const SessionLog& s : sessions) {
    const auto b = static_cast<double>(s.clicks);
    const auto k = static_cast<double>(s.keystrokes);
    if (mode == WorkloadMode::ProductAsPrinted) {
      sum += coeffs.wheel_spin * s.wheel_spins + coeffs.mouse_distance * s.mouse_distance +
             coeffs.click * b + coeffs.keystroke * k;
    } else {
      sum += s.wheel_spins / coeffs.wheel_spin + s.mouse_distance / coeffs.mouse_distance +
             b / coeffs.click + k / coeffs.keystroke;
    }
  }
  return sum / static_cast<double>(sessions.size());
}

double efficiency(double e, double w) {
  if (w == 0.0) throw ZeroWorkload("efficiency: workload is zero");
  if (w < 0.0) throw ValidationError("efficiency: workload is negative");
  return e / w;
}

double user_achievement(const SessionLog& session, const PriorityWeights& weights) {
  const auto totals = condition_totals(session);
  for (Priority p : kAccumulationOrder) {
    const std::size_t i = index_of(p);
    if (totals[i] == 0 && weights.of(p) != 0.0) {
      throw DegenerateTotals("session " + session.subject_id +
                             ": zero conditions for a weighted priority");
    }
  }
  return user_term(weights, totals, condition_achieved(session));
}

std::vector<UsabilityScores> cell_scores(std::span<const SessionLog> sessions,
                                         const StudyConfig& config) {
  std::map<std::pair<std::string, std::string>, std::vector<const SessionLog*>> cells;
  for (const SessionLog& s : sessions) {
    cells[{s.service_id, s.environment_id}].push_back(&s);
  }

  std::set<std::string> services(config.services.begin(), config.services.end());
  std::set<std::string> envs;
  for (const Environment& e : config.environments) envs.insert(e.id);
  for (const auto& [key, unused] : cells) {
    if (!services.contains(key.first)) {
      throw ValidationError("cell_scores: unknown service \"" + key.first + "\"");
    }
    if (!envs.contains(key.second)) {
      throw ValidationError("cell_scores: unknown environment \"" + key.second + "\"");
    }
  }

  std::vector<UsabilityScores> out;
  for (const std::string& svc : config.services) {
    for (const Environment& env : config.environments) {
      auto it = cells.find({svc, env.id});
      if (it == cells.end()) continue;
      const auto& cell = it->second;

      EffectivenessInput input;
      input.weights = config.priority_weights;
      input.totals = condition_totals(*cell.front());
      std::vector<SessionLog> copies;
      copies.reserve(cell.size());
      for (const SessionLog* s : cell) {
        if (condition_totals(*s) != input.totals) {
          throw InconsistentConditions("cell (" + svc + ", " + env.id +
                                       "): condition counts differ across sessions");
        }
        input.achieved.push_back(condition_achieved(*s));
        copies.push_back(*s);
      }

      UsabilityScores row;
      row.service_id = svc;
      row.environment_id = env.id;
      row.e = effectiveness(input);
      row.w = workload(copies, config.workload_coefficients, config.workload_mode);
      row.h = efficiency(row.e, row.w);
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::string scores_to_csv(std::span<const UsabilityScores> rows) {
  std::string out = "service,environment,E,W,H,S\n";
  for (const UsabilityScores& r : rows) {
    out += r.service_id;
    out.push_back(',');
    out += r.environment_id;
    out.push_back(',');
    out += fmt_double(r.e);
    out.push_back(',');
    out += fmt_double(r.w);
    out.push_back(',');
    out += fmt_double(r.h);
    out.push_back(',');
    if (r.s) out += fmt_double(*r.s);
    out.push_back('\n');
  }
  return out;
}

std::vector<UsabilityScores> scores_from_csv(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  long row = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++row;
  if (strip_cr(line) != "service,environment,E,W,H,S") {
    throw ParseError(1, "unexpected header for usability CSV");
  }
  std::vector<UsabilityScores> rows;
  while (std::getline(in, line)) {
    ++row;
    std::string_view body = strip_cr(line);
    if (body.empty()) continue;
    auto fields = split_csv_line(body);
    if (fields.size() != 6) {
      throw ParseError(row, "expected 6 fields, got " + std::to_string(fields.size()));
    }
    UsabilityScores r;
    r.service_id = std::string(fields[0]);
    r.environment_id = std::string(fields[1]);
    r.e = parse_double_field(fields[2], row, "E");
    r.w = parse_double_field(fields[3], row, "W");
    r.h = parse_double_field(fields[4], row, "H");
    if (!fields[5].empty()) r.s = parse_double_field(fields[5], row, "S");
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace webqoe::usability
