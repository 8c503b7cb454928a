#pragma once

#include "automt/backends/client.hpp"
#include "automt/metamorphic_relation.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace automt::store
{

struct StoredMr
{
  std::size_t index = 0;
  mr::MetamorphicRelation mr;
  std::vector<float> embedding;  // unit norm
  std::uint64_t execution_count = 0;
};

struct Ranked
{
  std::size_t index = 0;
  double similarity = 0.0;
  std::uint64_t execution_count = 0;
};

/// Cosine similarity evaluated in double precision.
double cosine(std::span<const float> a, std::span<const float> b);

/// Strict ranking order: similarity descending, then execution count
/// ascending, then index ascending.
bool ranks_before(const Ranked & a, const Ranked & b);

inline constexpr const char * kCsvName = "mr_store.csv";
inline constexpr const char * kEmbeddingsName = "embeddings.bin";
inline constexpr std::uint32_t kEmbeddingMagic = 0x524D5441;  // "ATMR" little-endian

/// The MR table with execution counts and an exact-scan embedding index.
/// Readers run concurrently; execution-count updates are serialized and,
/// when the store is attached to a directory, persisted atomically.
class MrStore
{
public:
  MrStore();
  explicit MrStore(std::vector<StoredMr> entries);
  MrStore(MrStore && other) noexcept;
  MrStore & operator=(MrStore && other) noexcept;
  MrStore(const MrStore &) = delete;
  MrStore & operator=(const MrStore &) = delete;
  ~MrStore();

  /// Embeds the rendered Gherkin of each MR and assigns indices 0..n-1.
  static MrStore build(
    std::span<const mr::MetamorphicRelation> mrs, backends::BackendClient & embedder,
    std::string_view system_name = mr::kDefaultSystemName);

  static MrStore load(const std::filesystem::path & directory);
  void save(const std::filesystem::path & directory) const;

  /// Persist every later record_execution into `directory`.
  void attach(const std::filesystem::path & directory);

  std::size_t size() const;
  std::size_t dimension() const;
  StoredMr entry(std::size_t index) const;
  std::vector<StoredMr> entries() const;

  /// Top min(top_k, size) entries for a query embedding.
  std::vector<Ranked> rank(std::span<const float> query, std::size_t top_k) const;
  std::vector<Ranked> retrieve(
    std::string_view query_text, std::size_t top_k, backends::BackendClient & embedder) const;

  /// Atomically increments the count and returns the new value.
  std::uint64_t record_execution(std::size_t index);

private:
  void persist_locked(const std::filesystem::path & directory) const;

  std::vector<StoredMr> entries_;
  std::unique_ptr<std::mutex> mutex_;
  std::optional<std::filesystem::path> directory_;
  std::string system_name_{mr::kDefaultSystemName};
};

// Raw sidecar access, exposed for tooling and tests.
void write_embeddings(const std::filesystem::path & path, const std::vector<std::vector<float>> & rows);
std::vector<std::vector<float>> read_embeddings(const std::filesystem::path & path);

/// "adds a red light on the roadside" style manipulation column.
std::string manipulation_column(const mr::MetamorphicRelation & mr);

}  // namespace automt::store
