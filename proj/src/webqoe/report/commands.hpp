#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace webqoe::commands {

enum class Format { Csv, Json, Both };

// Each command computes every output in memory first and only then writes,
// atomically per file; a thrown error therefore leaves no partial outputs.
// Errors propagate as webqoe::Error; callers map code() to the exit status.

void cmd_simulate(const std::string& config_path, std::uint64_t seed, const std::string& out_dir,
                  std::ostream& out);

void cmd_qos(const std::vector<std::string>& trace_paths, const std::string& out_dir,
             Format format, std::ostream& out);

void cmd_usability(const std::string& sessions_path, const std::string& ratings_path,
                   const std::string& config_path, const std::string& out_dir, Format format,
                   std::ostream& out);

void cmd_regress(const std::string& qos_csv_path, const std::string& usability_csv_path,
                 const std::string& config_path, const std::string& out_dir, std::ostream& out);

void cmd_pipeline(const std::string& config_path, std::uint64_t seed, const std::string& out_dir,
                  std::ostream& out);

}  // namespace webqoe::commands
