#pragma once

#include <cstdio>
#include <string>

namespace timegate {

// Deterministic shortest-ish numeric formatting for reports and CSVs.
inline std::string format_g(double value, int precision = 12) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
    return buffer;
}

}  // namespace timegate
