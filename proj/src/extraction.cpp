#include "automt/extraction.hpp"

#include "automt/error.hpp"
#include "automt/io.hpp"
#include "automt/judgement.hpp"
#include "automt/parallel.hpp"
#include "automt/prompts.hpp"
#include "automt/text.hpp"

#include <set>

namespace automt::extraction
{

using nlohmann::json;

namespace
{

void check_profiles(std::span<const ParserProfile> profiles)
{
  if (profiles.empty()) throw PreconditionError("extraction needs at least one parser profile");
  std::set<std::string> names;
  for (const auto & p : profiles) {
    if (!p.backend) throw PreconditionError("parser profile '" + p.name + "' has no backend");
    if (p.prompt_template != kCotTemplate) {
      throw ConfigError("parser profile '" + p.name + "' uses unknown template '" + p.prompt_template + "'");
    }
    if (!names.insert(p.name).second) throw PreconditionError("duplicate parser profile '" + p.name + "'");
  }
}

}  // namespace

std::vector<CandidateResult> extract_candidates(
  std::string_view rule, std::span<const ParserProfile> profiles,
  const ontology::OntologyTaxonomy & taxonomy, std::string_view system_name)
{
  check_profiles(profiles);
  auto prompt = prompts::rule_parser_prompt(rule, taxonomy, system_name);
  std::vector<CandidateResult> out;
  out.reserve(profiles.size());
  for (const auto & profile : profiles) {
    CandidateResult result;
    result.profile = profile.name;
    try {
      result.raw_reply = profile.backend->chat(prompt);
    } catch (const Timeout & e) {
      throw BackendUnavailable(e.what());
    }
    try {
      auto parsed = mr::parse_gherkin_detailed(result.raw_reply, taxonomy);
      parsed.mr.source_rule = std::string(rule);
      parsed.mr.region = taxonomy.region();
      result.mr = std::move(parsed.mr);
      result.warnings = std::move(parsed.warnings);
    } catch (const BackendUnavailable &) {
      throw;
    } catch (const Error & e) {
      result.failure = CandidateFailure{e.code(), e.what()};
    }
    out.push_back(std::move(result));
  }
  return out;
}

double score_candidate(
  std::string_view rule, const mr::MetamorphicRelation & mr, backends::BackendClient & validator,
  std::string_view system_name, std::string * reply_out)
{
  auto prompt = prompts::mr_validation_prompt(rule, mr::render_gherkin(mr, system_name), system_name);
  std::string reply;
  try {
    reply = validator.chat(prompt);
  } catch (const Timeout & e) {
    throw BackendUnavailable(e.what());
  }
  if (reply_out) *reply_out = reply;
  auto answers = judgement::parse_answer_array(reply);
  if (answers.size() != 3) {
    throw MalformedJudgement(
      "validator returned " + std::to_string(answers.size()) + " answers, expected 3");
  }
  return mr::answers_to_score(answers);
}

std::optional<std::size_t> select_winner(std::span<const std::optional<double>> scores, double threshold)
{
  constexpr double kEps = 1e-12;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i]) continue;
    if (!best || *scores[i] < *scores[*best] - kEps) best = i;
  }
  if (best && *scores[*best] > threshold + kEps) return std::nullopt;
  return best;
}

ExtractionRecord extract_rule(
  std::string_view rule, std::span<const ParserProfile> profiles,
  const ontology::OntologyTaxonomy & taxonomy, backends::BackendClient & validator,
  const ExtractionOptions & options)
{
  ExtractionRecord record;
  record.rule_text = std::string(rule);
  record.region = taxonomy.region();
  record.candidates = extract_candidates(rule, profiles, taxonomy, options.system_name);

  std::vector<std::optional<double>> scores;
  for (auto & candidate : record.candidates) {
    if (candidate.mr) {
      try {
        candidate.score = score_candidate(
          rule, *candidate.mr, validator, options.system_name, &candidate.judge_reply);
        candidate.mr->hallucination_score = *candidate.score;
      } catch (const MalformedJudgement & e) {
        candidate.failure = CandidateFailure{e.code(), e.what()};
      }
    }
    scores.push_back(candidate.score);
  }
  record.winner = select_winner(scores, options.acceptance_threshold);
  return record;
}

std::vector<ExtractionRecord> extract_corpus(
  std::span<const std::string> rules, std::span<const ParserProfile> profiles,
  const ontology::OntologyTaxonomy & taxonomy, backends::BackendClient & validator,
  const ExtractionOptions & options)
{
  if (rules.empty()) throw PreconditionError("extraction needs at least one rule");
  check_profiles(profiles);
  return parallel_map(rules.size(), options.parallelism, [&](std::size_t i) {
    return extract_rule(rules[i], profiles, taxonomy, validator, options);
  });
}

std::vector<mr::MetamorphicRelation> winners(std::span<const ExtractionRecord> records)
{
  std::vector<mr::MetamorphicRelation> out;
  for (const auto & record : records) {
    if (record.winner) out.push_back(*record.candidates[*record.winner].mr);
  }
  return out;
}

json to_json(const ExtractionRecord & record, std::string_view system_name)
{
  json candidates = json::array();
  for (const auto & c : record.candidates) {
    json item{
      {"profile", c.profile},
      {"mr", c.mr ? mr::to_record(*c.mr, system_name) : json()},
      {"failure", c.failure ? json{{"code", c.failure->code}, {"message", c.failure->message}} : json()},
      {"score", c.score ? json(*c.score) : json()},
      {"warnings", c.warnings},
      {"raw_reply", c.raw_reply},
      {"judge_reply", c.judge_reply}};
    candidates.push_back(std::move(item));
  }
  return json{
    {"rule", record.rule_text},
    {"region", record.region},
    {"candidates", candidates},
    {"winner", record.winner ? json(*record.winner) : json()}};
}

std::vector<std::string> parse_rules(std::string_view text_in)
{
  std::vector<std::string> rules;
  for (const auto & line : text::split_lines(text_in)) {
    auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    rules.push_back(trimmed);
  }
  return rules;
}

std::vector<std::string> read_rules(const std::filesystem::path & path)
{
  return parse_rules(io::read_file(path));
}

}  // namespace automt::extraction
