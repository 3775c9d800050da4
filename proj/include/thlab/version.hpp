#pragma once

namespace thlab {

inline constexpr const char* kToolName = "threshold_lab";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace thlab
