#pragma once

namespace coursemi {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace coursemi
