#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace matchlab {

// Bad user input or malformed data. The CLI maps this to exit code 1;
// any other exception is an internal error (exit code 2).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// FNV-1a, 64-bit. Used for feature hashing so results do not depend on the
// standard library's std::hash.
inline uint64_t fnv1a64(std::string_view data, uint64_t seed = 0) {
    uint64_t h = 14695981039346656037ULL ^ seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Uniform double in [0, 1) from a 64-bit word (top 53 bits).
inline double to_unit_double(uint64_t word) {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

// splitmix64: tiny seedable generator for places where mt19937_64 is overkill.
struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double next_double() { return to_unit_double(next()); }
};

// Shortest-faithful decimal form of a double; round-trips exactly.
std::string format_double(double v);

enum class LogLevel { quiet = 0, warn = 1, info = 2, debug = 3 };

// Level comes from MATCHLAB_LOG ({quiet,warn,info,debug}), default warn.
LogLevel log_level();
void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

// Runs fn(i) for i in [0, count) across `jobs` threads. Work is split into
// contiguous index ranges so callers that write result[i] get output that is
// independent of scheduling. jobs <= 1 runs inline.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

std::size_t default_jobs();

}  // namespace matchlab
