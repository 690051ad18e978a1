#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace babylon {

/// Collapses runs of ASCII whitespace to single spaces and trims the ends.
std::string canonical_whitespace(std::string_view text);

/// Joins tokens with single spaces.
std::string join_tokens(const std::vector<std::string>& tokens);

/// FNV-1a 64-bit. Used by the hashed embedding provider and as the
/// request key for canned LLM fixtures; stable across platforms.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

} // namespace babylon
