#pragma once

namespace fairaudit {

inline constexpr const char* kToolkitName = "fairaudit";
inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace fairaudit
