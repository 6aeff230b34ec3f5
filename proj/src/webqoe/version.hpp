#pragma once

namespace webqoe {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "webqoe";

}  // namespace webqoe
