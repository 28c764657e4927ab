#pragma once

namespace riskmin {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace riskmin
