#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

namespace hystereact {

// Shortest round-trip decimal representation (std::to_chars), so CSV
// output is bit-reproducible across platforms.
inline std::string fmt(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline std::string fmt(int x) { return std::to_string(x); }

// FNV-1a, used for manifest content hashes.
inline std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace hystereact
