#include "bandana/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace bandana::logging {

namespace {
std::atomic<Level> g_level{Level::warn};
std::mutex g_mutex;

void emit(Level lvl, const char* tag, std::string_view msg) {
    if (lvl < g_level.load()) return;
    std::lock_guard lock(g_mutex);
    std::cerr << tag << msg << '\n';
}
}  // namespace

void set_level(Level lvl) { g_level.store(lvl); }
Level level() { return g_level.load(); }

void debug(std::string_view msg) { emit(Level::debug, "debug: ", msg); }
void info(std::string_view msg) { emit(Level::info, "", msg); }
void warn(std::string_view msg) { emit(Level::warn, "warning: ", msg); }
void error(std::string_view msg) { emit(Level::error, "error: ", msg); }

}  // namespace bandana::logging
