#pragma once

// Minimal leveled logging to stderr. The FSL_LOG environment variable picks
// the threshold: error, warn (default), info or debug.

#include <string_view>

namespace fsl::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level threshold();
void set_threshold(Level level);
bool enabled(Level level);
void write(Level level, std::string_view message);

inline void error(std::string_view m) { write(Level::Error, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void debug(std::string_view m) { write(Level::Debug, m); }

}  // namespace fsl::log
