#pragma once

#include <cstdint>
#include <string>

namespace miraisim {

/// FNV-1a, pinned here so digests and seeded draws never depend on the
/// standard library's std::hash.
inline std::uint64_t fnv1a(const std::string& text,
                           std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

}  // namespace miraisim
