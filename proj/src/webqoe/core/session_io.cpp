#include "webqoe/core/session_io.hpp"

#include <nlohmann/json.hpp>
#include <sstream>
#include <string_view>

#include "webqoe/core/fsio.hpp"
#include "webqoe/core/textio.hpp"
#include "webqoe/errors.hpp"

namespace webqoe {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

Priority parse_priority(const std::string& s, long row) {
  if (s == "H") return Priority::High;
  if (s == "M") return Priority::Mid;
  if (s == "L") return Priority::Low;
  throw ParseError(row, "conditions.priority: expected H, M or L, got \"" + s + "\"");
}

char priority_letter(Priority p) {
  switch (p) {
    case Priority::High: return 'H';
    case Priority::Mid: return 'M';
    default: return 'L';
  }
}

void check_rating(int rating, long row) {
  if (rating < 1 || rating > 7) {
    throw ValidationError("row " + std::to_string(row) + ": rating " + std::to_string(rating) +
                          " outside 1..7");
  }
}

SessionLog session_from_json(const json& j, long row) {
  SessionLog s;
  try {
    s.subject_id = j.at("subject_id").get<std::string>();
    s.service_id = j.at("service_id").get<std::string>();
    s.environment_id = j.at("environment_id").get<std::string>();
    s.wheel_spins = j.at("wheel_spins").get<double>();
    s.mouse_distance = j.at("mouse_distance").get<double>();
    s.clicks = j.at("clicks").get<std::int64_t>();
    s.keystrokes = j.at("keystrokes").get<std::int64_t>();
    s.rating = j.at("rating").get<int>();
    const json& conds = j.at("conditions");
    if (!conds.is_array()) throw ParseError(row, "conditions: expected array");
    for (const json& c : conds) {
      ConditionOutcome outcome;
      outcome.priority = parse_priority(c.at("priority").get<std::string>(), row);
      outcome.achieved = c.at("achieved").get<bool>();
      s.conditions.push_back(outcome);
    }
  } catch (const json::exception& e) {
    throw ParseError(row, std::string("session object: ") + e.what());
  }
  if (s.wheel_spins < 0 || s.mouse_distance < 0 || s.clicks < 0 || s.keystrokes < 0) {
    throw ValidationError("row " + std::to_string(row) + ": interaction counts must be >= 0");
  }
  if (s.conditions.empty()) {
    throw ValidationError("row " + std::to_string(row) + ": conditions must be non-empty");
  }
  check_rating(s.rating, row);
  return s;
}

}  // namespace

std::vector<SessionLog> parse_sessions_jsonl(const std::string& content) {
  std::vector<SessionLog> sessions;
  std::istringstream in(content);
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::string_view body = strip_cr(line);
    if (body.empty()) continue;
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded()) throw ParseError(row, "invalid JSON");
    if (!j.is_object()) throw ParseError(row, "expected a JSON object");
    sessions.push_back(session_from_json(j, row));
  }
  return sessions;
}

std::vector<SessionLog> load_sessions(const std::filesystem::path& path) {
  try {
    return parse_sessions_jsonl(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(e.row(), path.string() + ": " + e.what());
  }
}

std::string sessions_to_jsonl(std::span<const SessionLog> sessions) {
  std::string out;
  for (const SessionLog& s : sessions) {
    ordered_json j;
    j["subject_id"] = s.subject_id;
    j["service_id"] = s.service_id;
    j["environment_id"] = s.environment_id;
    j["wheel_spins"] = s.wheel_spins;
    j["mouse_distance"] = s.mouse_distance;
    j["clicks"] = s.clicks;
    j["keystrokes"] = s.keystrokes;
    ordered_json conds = ordered_json::array();
    for (const ConditionOutcome& c : s.conditions) {
      ordered_json cj;
      cj["priority"] = std::string(1, priority_letter(c.priority));
      cj["achieved"] = c.achieved;
      conds.push_back(std::move(cj));
    }
    j["conditions"] = std::move(conds);
    j["rating"] = s.rating;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

void save_sessions(std::span<const SessionLog> sessions, const std::filesystem::path& path) {
  write_file_atomic(path, sessions_to_jsonl(sessions));
}

std::vector<RatingRow> parse_ratings_csv(const std::string& content) {
  constexpr std::string_view kHeader = "subject_id,service_id,environment_id,rating";
  std::vector<RatingRow> rows;
  std::istringstream in(content);
  std::string line;
  long row = 0;

  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++row;
  if (strip_cr(line) != kHeader) {
    throw ParseError(1, "expected header \"" + std::string(kHeader) + "\"");
  }

  while (std::getline(in, line)) {
    ++row;
    std::string_view body = strip_cr(line);
    if (body.empty()) continue;
    auto fields = split_csv_line(body);
    if (fields.size() != 4) {
      throw ParseError(row, "expected 4 fields, got " + std::to_string(fields.size()));
    }
    RatingRow r;
    r.subject_id = std::string(fields[0]);
    r.service_id = std::string(fields[1]);
    r.environment_id = std::string(fields[2]);
    r.rating = parse_int_field<int>(fields[3], row, "rating");
    check_rating(r.rating, row);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<RatingRow> load_ratings(const std::filesystem::path& path) {
  try {
    return parse_ratings_csv(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(e.row(), path.string() + ": " + e.what());
  }
}

std::string ratings_to_csv(std::span<const RatingRow> rows) {
  std::string out = "subject_id,service_id,environment_id,rating\n";
  for (const RatingRow& r : rows) {
    out += r.subject_id;
    out.push_back(',');
    out += r.service_id;
    out.push_back(',');
    out += r.environment_id;
    out.push_back(',');
    out += std::to_string(r.rating);
    out.push_back('\n');
  }
  return out;
}

void save_ratings(std::span<const RatingRow> rows, const std::filesystem::path& path) {
  write_file_atomic(path, ratings_to_csv(rows));
}

}  // namespace webqoe
