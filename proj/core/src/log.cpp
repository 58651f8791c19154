#include "lps/log.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace lps {

namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

LogSink& sink() {
    static LogSink s = [](LogLevel level, std::string_view msg) {
        if (level == LogLevel::debug) return;
        std::cerr << (level == LogLevel::warning ? "[warn] " : "[info] ") << msg << '\n';
    };
    return s;
}

}  // namespace

LogSink set_log_sink(LogSink s) {
    std::lock_guard lock(sink_mutex());
    LogSink old = std::move(sink());
    sink() = std::move(s);
    return old;
}

void log(LogLevel level, std::string_view message) {
    std::lock_guard lock(sink_mutex());
    if (sink()) sink()(level, message);
}

}  // namespace lps
