#pragma once

namespace epom {
inline constexpr const char* version = "0.1.0";
}
