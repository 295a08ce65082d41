#pragma once

namespace hystloop {

inline constexpr const char* kToolName = "hystloop";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace hystloop
