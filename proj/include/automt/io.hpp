#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace automt::io
{

std::string read_file(const std::filesystem::path & path);

// Write to a sibling temp file, then rename over the target.
void write_file_atomic(const std::filesystem::path & path, std::string_view contents);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path & path);
void write_jsonl(const std::filesystem::path & path, const std::vector<nlohmann::json> & rows);
void append_jsonl(const std::filesystem::path & path, const nlohmann::json & row);

// Compact, key-sorted serialization used for every persisted record.
std::string dump(const nlohmann::json & value);
std::string dump_pretty(const nlohmann::json & value);

}  // namespace automt::io
