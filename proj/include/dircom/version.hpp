#pragma once

namespace dircom {

inline constexpr const char* kVersion = "0.1.0";

} // namespace dircom
