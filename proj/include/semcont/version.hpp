#pragma once

namespace semcont {

inline constexpr const char* kToolName = "semcont";
inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace semcont
