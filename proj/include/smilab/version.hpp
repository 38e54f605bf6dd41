#pragma once

namespace smilab {

inline constexpr const char* kArtifactVersion = "0.1.0";

} // namespace smilab
