#pragma once

namespace pincon {

inline constexpr const char* kVersion = "0.1.0";

} // namespace pincon
