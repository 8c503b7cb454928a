#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace automt::text
{

// Lowercase (ASCII), trim, and collapse internal whitespace runs to one space.
std::string canonicalize(std::string_view value);

std::string trim(std::string_view value);
std::string to_lower(std::string_view value);
std::vector<std::string> split(std::string_view value, char delimiter);
std::vector<std::string> split_lines(std::string_view value);
bool contains_word(std::string_view haystack, std::string_view word);
std::string replace_all(std::string value, std::string_view from, std::string_view to);

// FNV-1a. Stable across platforms; used for content hashes and mock seeding.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint32_t fnv1a32(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t & state);
std::string hex64(std::uint64_t value);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view encoded);

std::string format_fixed(double value, int decimals);

}  // namespace automt::text
