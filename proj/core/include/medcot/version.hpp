#pragma once

namespace medcot {

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace medcot
