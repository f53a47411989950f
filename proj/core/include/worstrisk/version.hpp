#pragma once

namespace worstrisk {

inline constexpr const char* version() { return "0.1.0"; }

}  // namespace worstrisk
