#pragma once

namespace negurn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace negurn
