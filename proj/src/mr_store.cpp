#include "automt/mr_store.hpp"

#include "automt/csv.hpp"
#include "automt/error.hpp"
#include "automt/io.hpp"
#include "automt/text.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>

namespace automt::store
{

namespace
{

const std::vector<std::string> kHeader{
  "Index", "MR", "RoadType", "Manipulation", "ExpectedBehavior", "ExecutionCount", "Region",
  "SourceRule", "HallucinationScore"};

std::string escape_newlines(std::string_view value)
{
  std::string out;
  for (char c : value) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out;
}

std::string unescape_newlines(std::string_view value)
{
  std::string out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (value[i] == '\\' && i + 1 < value.size()) {
      ++i;
      out += value[i] == 'n' ? '\n' : value[i];
    } else {
      out += value[i];
    }
  }
  return out;
}

std::string shortest(double value)
{
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

template <typename T>
T parse_number(const std::string & field, const char * column)
{
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(std::string("bad ") + column + " value '" + field + "' in MR store");
  }
  return value;
}

std::vector<float> normalized(std::span<const float> v)
{
  double norm = 0.0;
  for (float x : v) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw DimensionMismatch("embedding has zero norm");
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

void put_le(std::string & out, std::uint64_t value, int bytes)
{
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(std::string_view in, std::size_t at, int bytes)
{
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return v;
}

}  // namespace

double cosine(std::span<const float> a, std::span<const float> b)
{
  if (a.size() != b.size()) throw DimensionMismatch("cosine of vectors with different dimensions");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

bool ranks_before(const Ranked & a, const Ranked & b)
{
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  if (a.execution_count != b.execution_count) return a.execution_count < b.execution_count;
  return a.index < b.index;
}

std::string manipulation_column(const mr::MetamorphicRelation & mr)
{
  return ontology::to_string(mr.verb) + " " + mr.manipulation;
}

MrStore::MrStore() : mutex_(std::make_unique<std::mutex>()) {}

MrStore::MrStore(std::vector<StoredMr> entries) : entries_(std::move(entries)), mutex_(std::make_unique<std::mutex>())
{
  std::size_t dim = entries_.empty() ? 0 : entries_.front().embedding.size();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].index != i) throw PreconditionError("store indices must be 0..n-1 in order");
    if (entries_[i].embedding.size() != dim || dim == 0) {
      throw DimensionMismatch("store embeddings must share one non-zero dimension");
    }
  }
}

MrStore::MrStore(MrStore && other) noexcept = default;
MrStore & MrStore::operator=(MrStore && other) noexcept = default;
MrStore::~MrStore() = default;

MrStore MrStore::build(
  std::span<const mr::MetamorphicRelation> mrs, backends::BackendClient & embedder,
  std::string_view system_name)
{
  if (mrs.empty()) throw PreconditionError("cannot build an MR store from an empty MR list");
  std::vector<std::string> texts;
  texts.reserve(mrs.size());
  for (const auto & m : mrs) texts.push_back(mr::render_gherkin(m, system_name));
  std::vector<std::vector<float>> vectors;
  try {
    vectors = embedder.embed(texts);
  } catch (const Timeout & e) {
    throw BackendUnavailable(e.what());
  }
  std::vector<StoredMr> entries;
  entries.reserve(mrs.size());
  for (std::size_t i = 0; i < mrs.size(); ++i) {
    entries.push_back(StoredMr{i, mrs[i], normalized(vectors[i]), 0});
  }
  MrStore store(std::move(entries));
  store.system_name_ = std::string(system_name);
  return store;
}

std::size_t MrStore::size() const
{
  std::lock_guard lock(*mutex_);
  return entries_.size();
}

std::size_t MrStore::dimension() const
{
  std::lock_guard lock(*mutex_);
  return entries_.empty() ? 0 : entries_.front().embedding.size();
}

StoredMr MrStore::entry(std::size_t index) const
{
  std::lock_guard lock(*mutex_);
  if (index >= entries_.size()) throw UnknownIndex("no MR with index " + std::to_string(index));
  return entries_[index];
}

std::vector<StoredMr> MrStore::entries() const
{
  std::lock_guard lock(*mutex_);
  return entries_;
}

std::vector<Ranked> MrStore::rank(std::span<const float> query, std::size_t top_k) const
{
  if (top_k == 0) throw PreconditionError("top_k must be at least 1");
  std::vector<Ranked> all;
  {
    std::lock_guard lock(*mutex_);
    if (entries_.empty()) throw PreconditionError("retrieval from an empty store");
    if (query.size() != entries_.front().embedding.size()) {
      throw DimensionMismatch(
        "query dimension " + std::to_string(query.size()) + " differs from store dimension " +
        std::to_string(entries_.front().embedding.size()));
    }
    all.reserve(entries_.size());
    for (const auto & e : entries_) all.push_back(Ranked{e.index, cosine(query, e.embedding), e.execution_count});
  }
  auto k = std::min(top_k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), ranks_before);
  all.resize(k);
  return all;
}

std::vector<Ranked> MrStore::retrieve(
  std::string_view query_text, std::size_t top_k, backends::BackendClient & embedder) const
{
  std::vector<std::string> texts{std::string(query_text)};
  std::vector<std::vector<float>> vectors;
  try {
    vectors = embedder.embed(texts);
  } catch (const Timeout & e) {
    throw BackendUnavailable(e.what());
  }
  return rank(normalized(vectors.front()), top_k);
}

std::uint64_t MrStore::record_execution(std::size_t index)
{
  std::lock_guard lock(*mutex_);
  if (index >= entries_.size()) throw UnknownIndex("no MR with index " + std::to_string(index));
  auto count = ++entries_[index].execution_count;
  if (directory_) persist_locked(*directory_);
  return count;
}

void MrStore::attach(const std::filesystem::path & directory)
{
  std::lock_guard lock(*mutex_);
  directory_ = directory;
}

void MrStore::persist_locked(const std::filesystem::path & directory) const
{
  csv::Table table;
  table.header = kHeader;
  std::vector<std::vector<float>> rows;
  for (const auto & e : entries_) {
    table.rows.push_back({
      std::to_string(e.index),
      escape_newlines(mr::render_gherkin(e.mr, system_name_)),
      e.mr.road_type,
      manipulation_column(e.mr),
      e.mr.expected_behavior,
      std::to_string(e.execution_count),
      e.mr.region,
      e.mr.source_rule,
      shortest(e.mr.hallucination_score),
    });
    rows.push_back(e.embedding);
  }
  io::write_file_atomic(directory / kCsvName, csv::write(table));
  write_embeddings(directory / kEmbeddingsName, rows);
}

void MrStore::save(const std::filesystem::path & directory) const
{
  std::lock_guard lock(*mutex_);
  persist_locked(directory);
}

MrStore MrStore::load(const std::filesystem::path & directory)
{
  auto table = csv::parse(io::read_file(directory / kCsvName));
  if (table.header.size() < 6 ||
      !std::equal(table.header.begin(), table.header.begin() + 6, kHeader.begin())) {
    throw ParseError("MR store CSV header does not start with the expected columns");
  }
  auto column = [&](const char * name) -> std::optional<std::size_t> {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - table.header.begin());
  };
  auto region_col = column("Region");
  auto rule_col = column("SourceRule");
  auto score_col = column("HallucinationScore");

  auto vectors = read_embeddings(directory / kEmbeddingsName);
  if (vectors.size() != table.rows.size()) {
    throw ParseError("embedding sidecar row count differs from the CSV row count");
  }
  std::string system_name(mr::kDefaultSystemName);
  std::vector<StoredMr> entries;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto & row = table.rows[i];
    if (row.size() != table.header.size()) {
      throw ParseError("MR store row " + std::to_string(i + 1) + " has the wrong number of fields");
    }
    StoredMr e;
    e.index = parse_number<std::size_t>(row[0], "Index");
    auto slots = mr::parse_gherkin_slots(unescape_newlines(row[1]));
    system_name = slots.system_token;
    e.mr.road_type = row[2];
    auto space = row[3].find(' ');
    if (space == std::string::npos) throw ParseError("bad Manipulation value '" + row[3] + "'");
    e.mr.verb = ontology::verb_from_string(row[3].substr(0, space));
    e.mr.manipulation = row[3].substr(space + 1);
    e.mr.expected_behavior = row[4];
    e.execution_count = parse_number<std::uint64_t>(row[5], "ExecutionCount");
    if (region_col) e.mr.region = row[*region_col];
    if (rule_col) e.mr.source_rule = row[*rule_col];
    if (score_col) e.mr.hallucination_score = parse_number<double>(row[*score_col], "HallucinationScore");
    if (slots.verb != e.mr.verb || text::canonicalize(slots.expected_behavior) != e.mr.expected_behavior) {
      throw ParseError("MR column of row " + std::to_string(i + 1) + " disagrees with its slot columns");
    }
    e.embedding = std::move(vectors[i]);
    entries.push_back(std::move(e));
  }
  MrStore store(std::move(entries));
  store.system_name_ = system_name;
  store.directory_ = directory;
  return store;
}

void write_embeddings(const std::filesystem::path & path, const std::vector<std::vector<float>> & rows)
{
  std::uint32_t dim = rows.empty() ? 0 : static_cast<std::uint32_t>(rows.front().size());
  std::string out;
  out.reserve(16 + rows.size() * dim * 4);
  put_le(out, kEmbeddingMagic, 4);
  put_le(out, dim, 4);
  put_le(out, rows.size(), 8);
  for (const auto & row : rows) {
    if (row.size() != dim) throw DimensionMismatch("ragged embedding matrix");
    for (float v : row) put_le(out, std::bit_cast<std::uint32_t>(v), 4);
  }
  io::write_file_atomic(path, out);
}

std::vector<std::vector<float>> read_embeddings(const std::filesystem::path & path)
{
  auto bytes = io::read_file(path);
  if (bytes.size() < 16 || get_le(bytes, 0, 4) != kEmbeddingMagic) {
    throw ParseError(path.string() + " is not an embedding sidecar");
  }
  auto dim = get_le(bytes, 4, 4);
  auto rows = get_le(bytes, 8, 8);
  if (bytes.size() != 16 + rows * dim * 4) throw ParseError(path.string() + " has a truncated matrix");
  std::vector<std::vector<float>> out(rows, std::vector<float>(dim));
  std::size_t at = 16;
  for (auto & row : out) {
    for (auto & v : row) {
      v = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(bytes, at, 4)));
      at += 4;
    }
  }
  return out;
}

}  // namespace automt::store
