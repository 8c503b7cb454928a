#pragma once

#include "automt/backends/client.hpp"
#include "automt/metamorphic_relation.hpp"
#include "automt/mr_store.hpp"
#include "automt/ontology.hpp"
#include "automt/oracle.hpp"
#include "automt/stats.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace automt::testing
{

std::filesystem::path source_dir();

/// Fresh directory removed on destruction.
class TempDir
{
public:
  explicit TempDir(const std::string & tag = "automt");
  ~TempDir();
  TempDir(const TempDir &) = delete;
  TempDir & operator=(const TempDir &) = delete;
  const std::filesystem::path & path() const { return path_; }

private:
  std::filesystem::path path_;
};

const ontology::OntologyTaxonomy & de_taxonomy();

std::shared_ptr<backends::BackendClient> mock_client(
  backends::BackendKind kind, const std::string & url = "mock:default", std::uint64_t seed = 0);

/// Transport driven by a callback; counts calls.
class ScriptedTransport : public backends::Transport
{
public:
  using Handler = std::function<nlohmann::json(std::string_view, const nlohmann::json &, int)>;
  explicit ScriptedTransport(Handler handler) : handler_(std::move(handler)) {}
  nlohmann::json post(std::string_view route, const nlohmann::json & body, const std::string &) override
  {
    return handler_(route, body, calls_++);
  }
  int calls() const { return calls_; }

private:
  Handler handler_;
  int calls_ = 0;
};

std::shared_ptr<backends::BackendClient> scripted_client(
  backends::BackendKind kind, std::shared_ptr<ScriptedTransport> transport, int max_retries = 2);

/// Uniformly random ontology-valid MR with empty provenance.
mr::MetamorphicRelation random_mr(const ontology::OntologyTaxonomy & taxonomy, std::mt19937_64 & rng);

/// First profile holding the lowest score, if that score does not exceed the threshold.
std::optional<std::size_t> brute_force_winner(std::span<const std::optional<double>> scores, double threshold);

/// Full sort of every entry by (similarity desc, count asc, index asc), truncated.
std::vector<store::Ranked> brute_force_rank(
  const std::vector<store::StoredMr> & entries, std::span<const float> query, std::size_t top_k);

/// Rule table coded separately from the oracle module.
bool brute_force_satisfied(
  oracle::Behavior behavior, double speed, double steering, double speed_lo, double speed_hi, double steer_lo,
  double steer_hi, oracle::SignConvention convention);

/// Weighted kappa evaluated over every ordered rater pair and every pooled rating pair.
double brute_force_kappa(const stats::RatingTable & table, stats::KappaWeights weights);

struct WelchReference
{
  double t = 0.0;
  double df = 0.0;
  double p = 0.0;
};

/// Welch statistics in 50-digit arithmetic with Boost's incomplete beta.
WelchReference welch_reference(std::span<const double> a, std::span<const double> b);

/// Solid test frame carrying a scene tag in its bottom row.
Image tagged_frame(const std::string & case_id, std::uint8_t road, float speed, float steering,
                   std::uint16_t frame_index = 0, int width = 32, int height = 8);

}  // namespace automt::testing
