#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "webqoe/core/types.hpp"

namespace webqoe {

std::vector<SessionLog> parse_sessions_jsonl(const std::string& content);
std::vector<SessionLog> load_sessions(const std::filesystem::path& path);
std::string sessions_to_jsonl(std::span<const SessionLog> sessions);
void save_sessions(std::span<const SessionLog> sessions, const std::filesystem::path& path);

std::vector<RatingRow> parse_ratings_csv(const std::string& content);
std::vector<RatingRow> load_ratings(const std::filesystem::path& path);
std::string ratings_to_csv(std::span<const RatingRow> rows);
void save_ratings(std::span<const RatingRow> rows, const std::filesystem::path& path);

}  // namespace webqoe
