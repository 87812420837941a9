#pragma once

namespace ccrn {

inline constexpr const char* kVersion = "coupled-crn 0.1.0";

}  // namespace ccrn
