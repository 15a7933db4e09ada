#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace sdkcli {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

/// Level from SDK_LOG_LEVEL (error|warn|info|debug), default warn.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("SDK_LOG_LEVEL");
    if (env == nullptr) {
      return LogLevel::kWarn;
    }
    const std::string v(env);
    if (v == "error") return LogLevel::kError;
    if (v == "warn") return LogLevel::kWarn;
    if (v == "info") return LogLevel::kInfo;
    if (v == "debug") return LogLevel::kDebug;
    return LogLevel::kWarn;
  }();
  return level;
}

inline void log(LogLevel level, const std::string& msg) {
  if (level > log_level()) {
    return;
  }
  const char* tag = level == LogLevel::kError  ? "error"
                    : level == LogLevel::kWarn ? "warn"
                    : level == LogLevel::kInfo ? "info"
                                               : "debug";
  std::cerr << "[" << tag << "] " << msg << "\n";
}

inline void log_info(const std::string& msg) { log(LogLevel::kInfo, msg); }
inline void log_warn(const std::string& msg) { log(LogLevel::kWarn, msg); }
inline void log_debug(const std::string& msg) { log(LogLevel::kDebug, msg); }

}  // namespace sdkcli
