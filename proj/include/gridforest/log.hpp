#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace gridforest::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Log level from GRIDFOREST_LOG (error|warn|info|debug), default warn.
inline Level level() {
    static Level lvl = [] {
        const char* env = std::getenv("GRIDFOREST_LOG");
        if (!env) return Level::Warn;
        if (std::strcmp(env, "error") == 0) return Level::Error;
        if (std::strcmp(env, "info") == 0) return Level::Info;
        if (std::strcmp(env, "debug") == 0) return Level::Debug;
        return Level::Warn;
    }();
    return lvl;
}

template <typename... Args>
void emit(Level lvl, const char* tag, const char* fmt, Args... args) {
    if (lvl > level()) return;
    std::fprintf(stderr, "[gridforest:%s] ", tag);
    std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
}

template <typename... Args>
void warn(const char* fmt, Args... args) {
    emit(Level::Warn, "warn", fmt, args...);
}

template <typename... Args>
void info(const char* fmt, Args... args) {
    emit(Level::Info, "info", fmt, args...);
}

template <typename... Args>
void debug(const char* fmt, Args... args) {
    emit(Level::Debug, "debug", fmt, args...);
}

}  // namespace gridforest::log
