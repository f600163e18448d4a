#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace judgeopt {

// Deterministic, platform-independent hashing and RNG primitives. Everything
// that must reproduce byte-identically across runs (splits, sample seeds,
// bootstrap draws, simulated completions) goes through these rather than
// std::hash or distribution objects, whose results are implementation-defined.

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and an index
/// (used for per-sample and per-resample streams).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base + 0x9e3779b97f4a7c15ull * (index + 1));
}

/// Derives a stream seed from a base seed and a string salt.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view salt) {
    return splitmix64(base ^ fnv1a64(salt));
}

/// Minimal counter-based RNG over splitmix64.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [-1, 1).
    double next_centered() { return next_double() * 2.0 - 1.0; }

    /// Uniform index in [0, n). n must be positive.
    std::size_t next_index(std::size_t n) { return static_cast<std::size_t>(next() % n); }

private:
    std::uint64_t state_;
};

/// 16-character lowercase hex rendering, used for content-hash ids.
inline std::string hex16(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

} // namespace judgeopt
