#pragma once

namespace mscw {

inline constexpr const char* version = "0.1.0";

} // namespace mscw
