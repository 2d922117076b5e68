#pragma once

namespace prophet {

inline constexpr const char* version_string = "prophet-bench 1.0.0";

}  // namespace prophet
