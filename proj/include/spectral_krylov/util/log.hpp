#pragma once

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace spk {

enum class LogLevel { error = 0, info = 1, debug = 2 };

/// Verbosity on standard error, controlled by SPECTRAL_KRYLOV_LOG
/// (error | info | debug). Default: error.
inline LogLevel log_level() {
    static const LogLevel lvl = [] {
        const char* e = std::getenv("SPECTRAL_KRYLOV_LOG");
        if (e && std::strcmp(e, "debug") == 0) return LogLevel::debug;
        if (e && std::strcmp(e, "info") == 0) return LogLevel::info;
        return LogLevel::error;
    }();
    return lvl;
}

inline void log_at(LogLevel lvl, const char* tag, const char* fmt, ...) {
    if (lvl > log_level()) return;
    std::fprintf(stderr, "[spectral-krylov %s] ", tag);
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

#define SPK_LOG_ERROR(...) ::spk::log_at(::spk::LogLevel::error, "error", __VA_ARGS__)
#define SPK_LOG_INFO(...) ::spk::log_at(::spk::LogLevel::info, "info", __VA_ARGS__)
#define SPK_LOG_DEBUG(...) ::spk::log_at(::spk::LogLevel::debug, "debug", __VA_ARGS__)

}  // namespace spk
