#pragma once

namespace fixcert {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fixcert
