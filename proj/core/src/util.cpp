#include "matchlab/util.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <mutex>
#include <thread>

namespace matchlab {

std::string format_double(double v) {
    char buf[64];
    // %.17g round-trips any finite double.
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // Trim to the shortest representation that still parses back exactly.
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[64];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
}

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("MATCHLAB_LOG");
        if (!env) return LogLevel::warn;
        std::string v(env);
        if (v == "quiet") return LogLevel::quiet;
        if (v == "info") return LogLevel::info;
        if (v == "debug") return LogLevel::debug;
        return LogLevel::warn;
    }();
    return level;
}

namespace {
std::mutex g_log_mutex;
void emit(const char* tag, const std::string& msg) {
    std::lock_guard<std::mutex> lock(g_log_mutex);
    std::cerr << tag << msg << "\n";
}
}  // namespace

void log_warn(const std::string& msg) {
    if (log_level() >= LogLevel::warn) emit("warning: ", msg);
}
void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) emit("info: ", msg);
}
void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) emit("debug: ", msg);
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    if (jobs == 0) jobs = 1;
    if (jobs > count) jobs = count;
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t chunk = (count + jobs - 1) / jobs;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < jobs; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::size_t default_jobs() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

}  // namespace matchlab
