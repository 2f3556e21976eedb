#pragma once

namespace clusterosc {

inline constexpr const char* kToolVersion = "clusterosc 0.1.0";

}
