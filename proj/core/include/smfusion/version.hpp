#pragma once

namespace smf {

inline constexpr const char* kVersion = "0.1.0";

} // namespace smf
