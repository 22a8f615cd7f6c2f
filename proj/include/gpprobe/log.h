#pragma once

#include <sstream>
#include <string>

namespace gpprobe::log {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kQuiet = 4 };

void SetLevel(Level level);
Level GetLevel();
void Write(Level level, const std::string& message);

// Counts warnings emitted since the last reset; used in run summaries.
int WarningCount();
void ResetWarningCount();

template <typename... Args>
std::string Concat(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

template <typename... Args>
void Debug(const Args&... args) { Write(Level::kDebug, Concat(args...)); }
template <typename... Args>
void Info(const Args&... args) { Write(Level::kInfo, Concat(args...)); }
template <typename... Args>
void Warn(const Args&... args) { Write(Level::kWarn, Concat(args...)); }
template <typename... Args>
void Err(const Args&... args) { Write(Level::kError, Concat(args...)); }

}  // namespace gpprobe::log
