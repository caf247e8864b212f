#include "ccw/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace ccw::log {

namespace {
std::atomic<Level> g_level{Level::info};
std::mutex g_mutex;

const char* tag(Level lvl) {
  switch (lvl) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
    default: return "";
  }
}
}  // namespace

void set_level(Level lvl) { g_level.store(lvl); }
Level level() { return g_level.load(); }

void write(Level lvl, const std::string& message) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[ccw " << tag(lvl) << "] " << message << '\n';
}

}  // namespace ccw::log
