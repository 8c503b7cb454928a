#include "automt/text.hpp"

#include "automt/error.hpp"

#include <array>
#include <cctype>
#include <cstdio>

namespace automt::text
{

namespace
{
bool is_space(char c)
{
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_char(char c)
{
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_';
}

constexpr std::string_view kBase64Alphabet =
  "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}  // namespace

std::string canonicalize(std::string_view value)
{
  std::string out;
  out.reserve(value.size());
  bool pending_space = false;
  for (char c : value) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string trim(std::string_view value)
{
  std::size_t begin = 0;
  std::size_t end = value.size();
  while (begin < end && is_space(value[begin])) ++begin;
  while (end > begin && is_space(value[end - 1])) --end;
  return std::string(value.substr(begin, end - begin));
}

std::string to_lower(std::string_view value)
{
  std::string out(value);
  for (auto & c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split(std::string_view value, char delimiter)
{
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = value.find(delimiter, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(value.substr(start));
      break;
    }
    parts.emplace_back(value.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::vector<std::string> split_lines(std::string_view value)
{
  auto lines = split(value, '\n');
  for (auto & line : lines) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }
  return lines;
}

bool contains_word(std::string_view haystack, std::string_view word)
{
  if (word.empty()) return false;
  std::size_t pos = 0;
  while ((pos = haystack.find(word, pos)) != std::string_view::npos) {
    bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]);
    auto after = pos + word.size();
    bool right_ok = after >= haystack.size() || !is_word_char(haystack[after]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

std::string replace_all(std::string value, std::string_view from, std::string_view to)
{
  if (from.empty()) return value;
  std::size_t pos = 0;
  while ((pos = value.find(from, pos)) != std::string::npos) {
    value.replace(pos, from.size(), to);
    pos += to.size();
  }
  return value;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis)
{
  std::uint64_t hash = basis;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint32_t fnv1a32(std::string_view bytes)
{
  std::uint32_t hash = 0x811c9dc5U;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x01000193U;
  }
  return hash;
}

std::uint64_t splitmix64(std::uint64_t & state)
{
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string hex64(std::uint64_t value)
{
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(value));
  return std::string(buf.data(), 16);
}

std::string base64_encode(std::string_view bytes)
{
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                      static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(kBase64Alphabet[(n >> 18) & 63]);
    out.push_back(kBase64Alphabet[(n >> 12) & 63]);
    out.push_back(kBase64Alphabet[(n >> 6) & 63]);
    out.push_back(kBase64Alphabet[n & 63]);
  }
  auto rest = bytes.size() - i;
  if (rest == 1) {
    std::uint32_t n = static_cast<unsigned char>(bytes[i]) << 16;
    out.push_back(kBase64Alphabet[(n >> 18) & 63]);
    out.push_back(kBase64Alphabet[(n >> 12) & 63]);
    out += "==";
  } else if (rest == 2) {
    std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out.push_back(kBase64Alphabet[(n >> 18) & 63]);
    out.push_back(kBase64Alphabet[(n >> 12) & 63]);
    out.push_back(kBase64Alphabet[(n >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::string base64_decode(std::string_view encoded)
{
  std::array<int, 256> lookup{};
  lookup.fill(-1);
  for (std::size_t k = 0; k < kBase64Alphabet.size(); ++k) {
    lookup[static_cast<unsigned char>(kBase64Alphabet[k])] = static_cast<int>(k);
  }
  std::string out;
  out.reserve(encoded.size() / 4 * 3);
  std::uint32_t buffer = 0;
  int bits = 0;
  for (char c : encoded) {
    if (c == '=') break;
    if (is_space(c)) continue;
    int v = lookup[static_cast<unsigned char>(c)];
    if (v < 0) throw ParseError("invalid base64 character");
    buffer = (buffer << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((buffer >> bits) & 0xFF));
    }
  }
  return out;
}

std::string format_fixed(double value, int decimals)
{
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*f", decimals, value);
  return std::string(buf.data());
}

}  // namespace automt::text
