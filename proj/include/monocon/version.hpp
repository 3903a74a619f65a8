#pragma once

namespace monocon {

inline constexpr const char* kVersion = "0.1.0";

}
