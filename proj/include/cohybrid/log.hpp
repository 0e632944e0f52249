#pragma once

// Minimal stderr logger. Verbosity comes from CODETR_LOG (error|info|debug),
// default error.

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace cohybrid::log {

enum class Level { error = 0, info = 1, debug = 2 };

inline Level level_from_env() {
  const char* v = std::getenv("CODETR_LOG");
  if (v == nullptr) return Level::error;
  const std::string_view s(v);
  if (s == "debug") return Level::debug;
  if (s == "info") return Level::info;
  return Level::error;
}

inline Level& threshold() {
  static Level lvl = level_from_env();
  return lvl;
}

inline void write(Level lvl, std::string_view msg) {
  if (static_cast<int>(lvl) > static_cast<int>(threshold())) return;
  static std::mutex mu;
  static constexpr const char* names[] = {"error", "info", "debug"};
  std::lock_guard lock(mu);
  std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << msg << '\n';
}

inline void error(std::string_view msg) { write(Level::error, msg); }
inline void info(std::string_view msg) { write(Level::info, msg); }
inline void debug(std::string_view msg) { write(Level::debug, msg); }

}  // namespace cohybrid::log
