#pragma once

#include "automt/ontology.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace automt::prompts
{

// Each template carries one distinctive marker phrase. The mock backends use
// classify() to route a prompt to the matching synthesis routine.
enum class PromptKind {
  RuleParser,
  MrValidation,
  SceneAnalysis,
  MrMatch,
  ScenarioAlignment,
  ManipulationVerification,
  Unknown
};

PromptKind classify(std::string_view prompt);
std::string to_string(PromptKind kind);

/// Text after the last "User:" marker, or the whole prompt when absent.
std::string subject_of(std::string_view prompt);

/// Chain-of-thought rule-parser prompt, instantiated with the ontology and a rule.
std::string rule_parser_prompt(
  std::string_view rule, const ontology::OntologyTaxonomy & taxonomy, std::string_view system_name);

/// Three-question SelfCheck prompt for one (rule, MR) pair.
std::string mr_validation_prompt(
  std::string_view rule, std::string_view gherkin, std::string_view system_name);

/// The three fixed validation questions, in order.
const std::vector<std::string> & validation_questions();

std::string scene_analysis_prompt();

struct MatchCandidate
{
  std::size_t index = 0;
  std::string gherkin;
  std::string road_type;
  std::string manipulation;  // verb + phrase, e.g. "adds a red light on the roadside"
  std::string expected_behavior;
  std::uint64_t execution_count = 0;
};

std::string mr_match_prompt(
  std::string_view test_case_description, const std::vector<MatchCandidate> & candidates);

std::string scenario_alignment_prompt();
std::string manipulation_verification_prompt(std::string_view manipulation);

// Listing lines inside the rule-parser prompt; shared with the mock parser.
inline constexpr std::string_view kRoadTypeListing = "Road Type elements: ";
inline constexpr std::string_view kAddsListing = "Manipulation elements (adds): ";
inline constexpr std::string_view kReplacesListing = "Manipulation elements (replaces): ";
inline constexpr std::string_view kBehaviorListing = "Ego-Vehicle Expected Behavior elements: ";
inline constexpr std::string_view kCandidatePrefix = "- Index: ";
inline constexpr std::string_view kManipulationQuote = "Manipulation: \"";

}  // namespace automt::prompts
