#pragma once

#include <functional>
#include <string_view>

// Line-oriented diagnostics. Everything goes to stderr unless a sink is
// installed; data never goes through here.
namespace vegrisk::log {

enum class Level { info, warn, error };

using Sink = std::function<void(Level, std::string_view)>;

/// Replaces the active sink and returns the previous one. An empty sink
/// restores the stderr default.
Sink set_sink(Sink sink);

void write(Level level, std::string_view message);
inline void info(std::string_view message) { write(Level::info, message); }
inline void warn(std::string_view message) { write(Level::warn, message); }
inline void error(std::string_view message) { write(Level::error, message); }

std::string_view level_name(Level level);

}  // namespace vegrisk::log
