#pragma once

namespace nfmi {

inline constexpr const char* kVersion = "0.3.0";

} // namespace nfmi
