#pragma once

namespace wgs {

inline constexpr const char* version() { return "1.0.0"; }

}  // namespace wgs
