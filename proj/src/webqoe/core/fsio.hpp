#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace webqoe {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over the target, so a
// crash mid-write never leaves a truncated file behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace webqoe
