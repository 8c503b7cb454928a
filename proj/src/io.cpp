#include "automt/io.hpp"

#include "automt/error.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace automt::io
{

std::string read_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path & path, std::string_view contents)
{
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000) +
         "_" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<nlohmann::json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      rows.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception & e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

void write_jsonl(const std::filesystem::path & path, const std::vector<nlohmann::json> & rows)
{
  std::string out;
  for (const auto & row : rows) {
    out += dump(row);
    out += '\n';
  }
  write_file_atomic(path, out);
}

void append_jsonl(const std::filesystem::path & path, const nlohmann::json & row)
{
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append to " + path.string());
  out << dump(row) << '\n';
}

// nlohmann::json objects are std::map-backed, so keys come out sorted.
std::string dump(const nlohmann::json & value) { return value.dump(); }

std::string dump_pretty(const nlohmann::json & value) { return value.dump(2) + "\n"; }

}  // namespace automt::io
