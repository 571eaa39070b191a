#include "fsl/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace fsl::log {

namespace {

Level from_env() {
    const char* env = std::getenv("FSL_LOG");
    if (env == nullptr) return Level::Warn;
    const std::string v(env);
    if (v == "error" || v == "0") return Level::Error;
    if (v == "info" || v == "2") return Level::Info;
    if (v == "debug" || v == "3") return Level::Debug;
    return Level::Warn;
}

std::atomic<int>& current() {
    static std::atomic<int> level{static_cast<int>(from_env())};
    return level;
}

const char* tag(Level level) {
    switch (level) {
        case Level::Error: return "error";
        case Level::Warn: return "warn";
        case Level::Info: return "info";
        case Level::Debug: return "debug";
    }
    return "?";
}

}  // namespace

Level threshold() { return static_cast<Level>(current().load()); }
void set_threshold(Level level) { current().store(static_cast<int>(level)); }
bool enabled(Level level) { return static_cast<int>(level) <= current().load(); }

void write(Level level, std::string_view message) {
    if (!enabled(level)) return;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[fsl " << tag(level) << "] " << message << '\n';
}

}  // namespace fsl::log
