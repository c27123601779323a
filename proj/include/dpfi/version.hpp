#pragma once

#include <string>

namespace dpfi {

inline constexpr const char* version = "0.1.0";

inline std::string compiler_id()
{
#if defined(__clang__)
  return "clang " __clang_version__;
#elif defined(__GNUC__)
  return "gcc " __VERSION__;
#else
  return "unknown";
#endif
}

}  // namespace dpfi
