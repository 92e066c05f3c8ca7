#include "vegrisk/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace vegrisk::log {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& active_sink() {
  static Sink sink;
  return sink;
}

}  // namespace

std::string_view level_name(Level level) {
  switch (level) {
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
  }
  return "info";
}

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  return std::exchange(active_sink(), std::move(sink));
}

void write(Level level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (active_sink()) {
    active_sink()(level, message);
    return;
  }
  std::cerr << '[' << level_name(level) << "] " << message << '\n';
}

}  // namespace vegrisk::log
