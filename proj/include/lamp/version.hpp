#pragma once

namespace lamp {

inline constexpr const char* kVersion = "lamp 0.1.0";

}  // namespace lamp
