#pragma once

namespace dualgnn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dualgnn
