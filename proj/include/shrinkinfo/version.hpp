#pragma once

namespace shrinkinfo {

inline constexpr const char* version = "0.1.0";

}  // namespace shrinkinfo
