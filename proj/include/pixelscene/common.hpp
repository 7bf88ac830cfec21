#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pxs {

// Bad user input, malformed files, violated preconditions. The CLI maps this
// to exit code 1; anything else escaping to main() exits 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures that are not the caller's fault (diverged training, I/O mid-write).
class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic RNG. mt19937_64 raw output is pinned by the standard; the
// bounded/real mappers below are hand-rolled because std distributions are
// implementation-defined and would break cross-platform reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0, n), n >= 1; rejection sampling to avoid modulo bias
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw InternalError("Rng::next_below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = eng_();
        while (v >= limit) v = eng_();
        return v % n;
    }

    // uniform integer in [lo, hi] inclusive
    int next_int(int lo, int hi) {
        if (hi < lo) throw InternalError("Rng::next_int: empty range");
        return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // uniform in [0, 1) with 53 random mantissa bits
    double next_real01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double next_real(double lo, double hi) { return lo + (hi - lo) * next_real01(); }

    // standard normal, Box-Muller with one cached value
    double next_gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = next_real01();
        while (u1 <= 0.0) u1 = next_real01();
        const double u2 = next_real01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

// Named substream seeds: every pipeline stage draws from derive_seed(seed, stage)
// so stages can be re-run in isolation with identical randomness.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view stream) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    const auto mix = [&h](std::uint8_t byte) {
        h ^= byte;
        h *= 1099511628211ull;
    };
    for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(base >> (8 * i)));
    for (const char ch : stream) mix(static_cast<std::uint8_t>(ch));
    return h;
}

// Shortest round-trip decimal form; identical bytes for identical doubles,
// which is what keeps metrics.txt and model files byte-reproducible.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& what) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ValidationError("invalid number for " + what + ": '" + std::string(text) + "'");
    return v;
}

inline long long parse_int(std::string_view text, const std::string& what) {
    long long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ValidationError("invalid integer for " + what + ": '" + std::string(text) + "'");
    return v;
}

}  // namespace pxs
