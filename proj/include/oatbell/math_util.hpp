#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace oatbell {

// ln binom(n, k) via lgamma: exact to ~1e-13 relative, immune to overflow.
inline double log_binom(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Integer power by repeated squaring; keeps sign information exact for
// negative bases (std::pow with a large real exponent does too, but this is
// branch-free on the sign and cheaper in the hot loops).
inline double ipow(double x, unsigned n) {
    double r = 1.0;
    while (n) {
        if (n & 1u) r *= x;
        x *= x;
        n >>= 1u;
    }
    return r;
}

// FNV-1a over raw bytes; used to fingerprint basis enumerations in checkpoints.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string base64_encode(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

}  // namespace oatbell
