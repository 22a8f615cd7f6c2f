#include "gpprobe/log.h"

#include <atomic>
#include <iostream>
#include <mutex>

namespace gpprobe::log {
namespace {

std::atomic<Level> g_level{Level::kInfo};
std::atomic<int> g_warnings{0};
std::mutex g_mu;

const char* Tag(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
    default: return "";
  }
}

}  // namespace

void SetLevel(Level level) { g_level = level; }
Level GetLevel() { return g_level; }

void Write(Level level, const std::string& message) {
  if (level == Level::kWarn) ++g_warnings;
  if (level < g_level.load()) return;
  std::lock_guard<std::mutex> lock(g_mu);
  std::cerr << "[gpprobe " << Tag(level) << "] " << message << '\n';
}

int WarningCount() { return g_warnings; }
void ResetWarningCount() { g_warnings = 0; }

}  // namespace gpprobe::log
