#pragma once

namespace orthoclone {

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace orthoclone
