#pragma once

#include "automt/ontology.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace automt::mr
{

inline constexpr std::string_view kDefaultSystemName = "AutoMT";

/// A Given/When/Then metamorphic relation plus its provenance.
struct MetamorphicRelation
{
  std::string road_type;          // Given
  ontology::Verb verb = ontology::Verb::Adds;
  std::string manipulation;       // When: object phrase incl. placement suffix
  std::string expected_behavior;  // Then
  std::string source_rule;
  std::string region;
  double hallucination_score = 0.0;

  bool operator==(const MetamorphicRelation &) const = default;
};

enum class Placement { OnRoad, Roadside, None, Unknown };

struct PlacementSplit
{
  std::string core;    // phrase without the suffix
  std::string suffix;  // "on the road", "on the roadside", or the unknown suffix text
  Placement placement = Placement::None;
};

/// Splits a trailing placement suffix off a manipulation phrase.
PlacementSplit split_placement(std::string_view manipulation);

/// "a" / "an" by the vowel rule; empty before the "any roads" wildcard.
std::string article_for(std::string_view road_type);

/// Renders the three-line Gherkin text. Throws InvalidMr when a slot is empty,
/// contains a line break, or the score lies outside [0, 1].
std::string render_gherkin(
  const MetamorphicRelation & mr, std::string_view system_name = kDefaultSystemName);

/// Given/When/Then slots as written, before ontology checks.
struct GherkinSlots
{
  std::string road_type;
  std::string system_token;
  ontology::Verb verb = ontology::Verb::Adds;
  std::string manipulation;
  std::string expected_behavior;
};

/// Line-anchored grammar only. Uses the last Given line that is followed by
/// When and Then lines, so chain-of-thought preambles are skipped.
GherkinSlots parse_gherkin_slots(std::string_view text);

struct ParsedMr
{
  MetamorphicRelation mr;
  std::vector<std::string> warnings;
};

ParsedMr parse_gherkin_detailed(std::string_view text, const ontology::OntologyTaxonomy & taxonomy);
MetamorphicRelation parse_gherkin(std::string_view text, const ontology::OntologyTaxonomy & taxonomy);

/// Throws OntologyViolation / VerbMismatch / InvalidMr when the MR breaks an invariant.
void validate(const MetamorphicRelation & mr, const ontology::OntologyTaxonomy & taxonomy);

/// Resolved manipulation target of an MR (nullptr when none is named).
const ontology::ManipulationTarget * target_of(
  const MetamorphicRelation & mr, const ontology::OntologyTaxonomy & taxonomy);

enum class Answer { Yes, No };

/// Mean of per-answer scores, yes = 0 and no = 1. Exactly three answers.
double answers_to_score(std::span<const Answer> answers);

// MR interchange record (one JSON object per JSONL line).
nlohmann::json to_record(
  const MetamorphicRelation & mr, std::string_view system_name = kDefaultSystemName);
MetamorphicRelation from_record(const nlohmann::json & record);

}  // namespace automt::mr
