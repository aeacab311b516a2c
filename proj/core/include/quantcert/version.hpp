#pragma once

namespace quantcert {

// Keep in sync with the project() version in the top-level CMakeLists.
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace quantcert
