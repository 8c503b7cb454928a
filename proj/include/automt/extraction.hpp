#pragma once

#include "automt/backends/client.hpp"
#include "automt/metamorphic_relation.hpp"
#include "automt/ontology.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace automt::extraction
{

inline constexpr std::string_view kCotTemplate = "cot-rule-parser-v1";
inline constexpr double kDefaultAcceptance = 1.0 / 3.0;

struct ParserProfile
{
  std::string name;
  std::shared_ptr<backends::BackendClient> backend;
  std::string prompt_template{kCotTemplate};
};

struct CandidateFailure
{
  std::string code;
  std::string message;
};

struct CandidateResult
{
  std::string profile;
  std::optional<mr::MetamorphicRelation> mr;
  std::optional<CandidateFailure> failure;  // parse failure or unscorable judgement
  std::optional<double> score;
  std::vector<std::string> warnings;
  std::string raw_reply;
  std::string judge_reply;
};

struct ExtractionRecord
{
  std::string rule_text;
  std::vector<CandidateResult> candidates;
  std::optional<std::size_t> winner;
  std::string region;
};

struct ExtractionOptions
{
  std::string system_name{mr::kDefaultSystemName};
  double acceptance_threshold = kDefaultAcceptance;
  std::size_t parallelism = 1;
};

/// One result per profile. Parse failures are captured on the candidate;
/// transport failures propagate as BackendUnavailable.
std::vector<CandidateResult> extract_candidates(
  std::string_view rule, std::span<const ParserProfile> profiles,
  const ontology::OntologyTaxonomy & taxonomy, std::string_view system_name = mr::kDefaultSystemName);

/// Sends the three-question validation prompt and maps the reply to a score.
/// Throws MalformedJudgement unless the reply carries exactly three yes/no answers.
double score_candidate(
  std::string_view rule, const mr::MetamorphicRelation & mr, backends::BackendClient & validator,
  std::string_view system_name = mr::kDefaultSystemName, std::string * reply_out = nullptr);

/// Index of the lowest score, first position on ties; nullopt when nothing
/// was scored or the best score exceeds the threshold.
std::optional<std::size_t> select_winner(
  std::span<const std::optional<double>> scores, double threshold = kDefaultAcceptance);

ExtractionRecord extract_rule(
  std::string_view rule, std::span<const ParserProfile> profiles,
  const ontology::OntologyTaxonomy & taxonomy, backends::BackendClient & validator,
  const ExtractionOptions & options = {});

/// One record per rule in input order, whatever order the backends finish in.
std::vector<ExtractionRecord> extract_corpus(
  std::span<const std::string> rules, std::span<const ParserProfile> profiles,
  const ontology::OntologyTaxonomy & taxonomy, backends::BackendClient & validator,
  const ExtractionOptions & options = {});

/// Winning MRs (with their score as hallucination_score), in record order.
std::vector<mr::MetamorphicRelation> winners(std::span<const ExtractionRecord> records);

nlohmann::json to_json(
  const ExtractionRecord & record, std::string_view system_name = mr::kDefaultSystemName);

/// One rule per line; blank lines and lines starting with '#' are skipped.
std::vector<std::string> parse_rules(std::string_view text);
std::vector<std::string> read_rules(const std::filesystem::path & path);

}  // namespace automt::extraction
