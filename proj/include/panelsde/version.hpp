#pragma once

namespace panelsde {

inline constexpr const char* kVersion = "0.1.0";
// Bumped on breaking changes to the model/panel JSON schema.
inline constexpr int kFormatVersion = 1;

}  // namespace panelsde
