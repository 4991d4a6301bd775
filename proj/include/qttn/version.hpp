#pragma once

namespace qttn {

inline constexpr const char* kArtifactVersion = "1.0.0";

}  // namespace qttn
