#include "bitefuse/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace bitefuse {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("BITEFUSE_LOG");
    if (env == nullptr) return LogLevel::Warn;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
    if (std::strcmp(env, "error") == 0) return LogLevel::Error;
    return LogLevel::Warn;
  }();
  return level;
}

void log_message(LogLevel level, const std::string& message) {
  if (level < log_level()) return;
  const char* tag = "warn";
  switch (level) {
    case LogLevel::Debug: tag = "debug"; break;
    case LogLevel::Info: tag = "info"; break;
    case LogLevel::Warn: tag = "warn"; break;
    case LogLevel::Error: tag = "error"; break;
  }
  std::fprintf(stderr, "[bitefuse %s] %s\n", tag, message.c_str());
}

}  // namespace bitefuse
