#pragma once

namespace sketchcond {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sketchcond
