#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <utility>

namespace fifotap {

// Log level from FIFO_TAP_LOG: "info" or "debug"; anything else is silent.
inline int log_level() {
    static int level = [] {
        const char* v = std::getenv("FIFO_TAP_LOG");
        if (!v) return 0;
        if (std::strcmp(v, "debug") == 0) return 2;
        if (std::strcmp(v, "info") == 0) return 1;
        return 0;
    }();
    return level;
}

template <typename... Args>
void log_info(const char* fmt, Args&&... args) {
    if (log_level() >= 1) {
        std::fprintf(stderr, "[fifotap] ");
        std::fprintf(stderr, fmt, std::forward<Args>(args)...);
        std::fprintf(stderr, "\n");
    }
}

template <typename... Args>
void log_debug(const char* fmt, Args&&... args) {
    if (log_level() >= 2) {
        std::fprintf(stderr, "[fifotap] ");
        std::fprintf(stderr, fmt, std::forward<Args>(args)...);
        std::fprintf(stderr, "\n");
    }
}

}  // namespace fifotap
