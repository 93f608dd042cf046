#pragma once

#include <cstdio>
#include <string>

namespace kinetostat::detail {

// Compact number for diagnostics.
inline std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace kinetostat::detail
