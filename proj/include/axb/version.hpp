#pragma once

namespace axb {

inline constexpr const char* app_version = "0.1.0";
inline constexpr int format_version = 1;

} // namespace axb
