#pragma once

namespace robustcs {
inline constexpr const char* kVersion = "0.1.0";
}
