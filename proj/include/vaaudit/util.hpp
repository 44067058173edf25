#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vaaudit {

inline std::uint64_t fnv1a_64(std::string_view data, std::uint64_t seed = 1469598103934665603ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// 32-hex-char content digest: two FNV-1a passes with distinct bases.
std::string content_digest(std::string_view data);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Reads a whole file; throws std::runtime_error naming the path when it
/// cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace vaaudit
