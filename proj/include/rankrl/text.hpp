#pragma once

#include <cstdio>
#include <string>

namespace rankrl {

// Shortest-practical round-trip formatting for logs and CSVs: %.17g keeps
// doubles bit-exact across write/parse cycles.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace rankrl
