#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace faithkit::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

// Level comes from FAITHKIT_LOG (debug|info|warn|error|off); default info.
inline Level threshold() {
    static Level lvl = [] {
        const char* e = std::getenv("FAITHKIT_LOG");
        if (!e) return Level::Info;
        if (std::strcmp(e, "debug") == 0) return Level::Debug;
        if (std::strcmp(e, "warn") == 0) return Level::Warn;
        if (std::strcmp(e, "error") == 0) return Level::Error;
        if (std::strcmp(e, "off") == 0) return Level::Off;
        return Level::Info;
    }();
    return lvl;
}

inline void emit(Level lvl, const char* tag, const std::string& msg) {
    if (lvl < threshold()) return;
    std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

inline void debug(const std::string& msg) { emit(Level::Debug, "debug", msg); }
inline void info(const std::string& msg) { emit(Level::Info, "info", msg); }
inline void warn(const std::string& msg) { emit(Level::Warn, "warn", msg); }
inline void error(const std::string& msg) { emit(Level::Error, "error", msg); }

}  // namespace faithkit::log
