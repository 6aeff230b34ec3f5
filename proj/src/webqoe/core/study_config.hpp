#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "webqoe/core/types.hpp"

namespace webqoe {

// The experiment grid as published: five network environments crossed with
// two services, weights 6:3:1, coefficients (100, 10000, 20, 20).
StudyConfig default_study_config();

StudyConfig study_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json study_config_to_json(const StudyConfig& config);

// Loads a config file; returns the parsed raw document too so callers can
// pick up optional sections (e.g. simulator settings) and hash the input.
struct LoadedConfig {
  StudyConfig config;
  nlohmann::json raw;
};
LoadedConfig load_study_config(const std::filesystem::path& path);

// Structural checks on the config alone.
std::vector<std::string> validate_config(const StudyConfig& config);

// Config checks plus session consistency: unknown ids, empty cells.
std::vector<std::string> validate_study(const StudyConfig& config,
                                        std::span<const SessionLog> sessions);

const Environment& environment_by_id(const StudyConfig& config, const std::string& id);

// FNV-1a 64-bit over a canonical dump; stable across runs and platforms.
std::uint64_t fnv1a64(std::string_view data);
std::string config_hash_hex(const nlohmann::json& raw);

}  // namespace webqoe
