#pragma once

#include <string>

namespace bitefuse {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

// Level comes from BITEFUSE_LOG (debug|info|warn|error); default warn.
LogLevel log_level();

void log_message(LogLevel level, const std::string& message);

inline void log_debug(const std::string& m) { log_message(LogLevel::Debug, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::Info, m); }
inline void log_warn(const std::string& m) { log_message(LogLevel::Warn, m); }
inline void log_error(const std::string& m) { log_message(LogLevel::Error, m); }

}  // namespace bitefuse
