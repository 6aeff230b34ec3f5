#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "webqoe/core/types.hpp"

namespace webqoe {

// Parses "trace_<service>_<environment>" stems; the environment is the part
// after the last underscore. Returns an empty label when the stem does not
// match.
TraceLabel label_from_filename(const std::filesystem::path& path);

PacketTrace parse_trace_csv(std::istream& in);

// Loads a packet trace CSV, sorts records by timestamp (stable), and labels
// it from the filename when possible.
PacketTrace load_trace(const std::filesystem::path& path);

std::string trace_to_csv(const PacketTrace& trace);

void save_trace(const PacketTrace& trace, const std::filesystem::path& path);

}  // namespace webqoe
