#pragma once

namespace geope {

inline constexpr const char* kVersion = "0.1.0";

} // namespace geope
