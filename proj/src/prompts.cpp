#include "automt/prompts.hpp"

#include "automt/text.hpp"

namespace automt::prompts
{

namespace
{

constexpr std::string_view kRuleParserMarker =
  "Your task is to convert traffic rules into structured \"Given-When-Then\" metamorphic relations";
constexpr std::string_view kValidationMarker =
  "Based on the list of close-ended yes or no questions, generate a JSON answer.";
constexpr std::string_view kSceneMarker = "# Analyze this driving scenario.";
constexpr std::string_view kMatchMarker = "select one MR from the retrieved context where:";
constexpr std::string_view kAlignmentMarker = "# Compare the road type of two driving scenes.";
constexpr std::string_view kVerificationMarker = "# Verify an image manipulation.";

const std::string kExampleRule =
  "Steady Red Light (Stop) Stop before entering the crosswalk or intersection";

std::string example_mr(std::string_view system_name)
{
  return "Given the ego-vehicle approaches to an intersection\nWhen " + std::string(system_name) +
         " adds a red light on the roadside\nThen ego-vehicle should slow down";
}

std::string key_concepts()
{
  return "# Key Concepts #\n"
         "1. traffic rule: Define how the ego-vehicle should behave in the specific driving "
         "scenario.\n"
         "2. Road Type: Road elements are specified in the traffic rule, such as crosswalk.\n"
         "3. Manipulation: \"adds\" objects specified in the traffic rule, such as red light "
         "(those items can be added \"on the road\" or \"by the road side\" based on the prior "
         "knowledge of LLM), or \"replaces\" environmental conditions, such as a rainy day.\n"
         "4. Ego-Vehicle Expected Behavior: The expected ego-vehicle behavior in the traffic rule, "
         "such as slow down, turn right.\n";
}

std::string join(const std::vector<std::string> & items, std::string_view separator)
{
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += separator;
    out += items[i];
  }
  return out;
}

std::string target_tag(const ontology::ManipulationTarget & target)
{
  switch (target.category) {
    case ontology::Category::TrafficInfrastructure:
      return target.subcategory.empty() ? "traffic infrastructure"
                                        : "traffic infrastructure/" + target.subcategory;
    case ontology::Category::Object: return "object";
    case ontology::Category::Environment: return "environment";
  }
  return "object";
}

}  // namespace

PromptKind classify(std::string_view prompt)
{
  if (prompt.find(kRuleParserMarker) != std::string_view::npos) return PromptKind::RuleParser;
  if (prompt.find(kValidationMarker) != std::string_view::npos) return PromptKind::MrValidation;
  if (prompt.find(kSceneMarker) != std::string_view::npos) return PromptKind::SceneAnalysis;
  if (prompt.find(kMatchMarker) != std::string_view::npos) return PromptKind::MrMatch;
  if (prompt.find(kAlignmentMarker) != std::string_view::npos) {
    return PromptKind::ScenarioAlignment;
  }
  if (prompt.find(kVerificationMarker) != std::string_view::npos) {
    return PromptKind::ManipulationVerification;
  }
  return PromptKind::Unknown;
}

std::string to_string(PromptKind kind)
{
  switch (kind) {
    case PromptKind::RuleParser: return "rule_parser";
    case PromptKind::MrValidation: return "mr_validation";
    case PromptKind::SceneAnalysis: return "scene_analysis";
    case PromptKind::MrMatch: return "mr_match";
    case PromptKind::ScenarioAlignment: return "scenario_alignment";
    case PromptKind::ManipulationVerification: return "manipulation_verification";
    case PromptKind::Unknown: return "unknown";
  }
  return "unknown";
}

std::string subject_of(std::string_view prompt)
{
  auto pos = prompt.rfind("User:");
  if (pos == std::string_view::npos) return std::string(prompt);
  return text::trim(prompt.substr(pos + 5));
}

std::string rule_parser_prompt(
  std::string_view rule, const ontology::OntologyTaxonomy & taxonomy, std::string_view system_name)
{
  std::vector<std::string> roads(taxonomy.road_types().begin(), taxonomy.road_types().end());
  roads.emplace_back(ontology::kAnyRoads);
  std::vector<std::string> adds;
  std::vector<std::string> replaces;
  for (const auto & target : taxonomy.manipulations()) {
    auto entry = target.name + " [" + target_tag(target) + "]";
    (ontology::verb_for(target) == ontology::Verb::Adds ? adds : replaces).push_back(entry);
  }
  std::vector<std::string> behaviors(
    taxonomy.expected_behaviors().begin(), taxonomy.expected_behaviors().end());

  std::string out;
  out += "## Role Setting\n";
  out += "You are an expert in traffic rules and scene analysis. Metamorphic Testing (MT) is a "
         "method used in autonomous vehicle testing. ";
  out += kRuleParserMarker;
  out += " (MRs) for vehicle testing.\n\n";
  out += key_concepts();
  out += "\n# EXAMPLE # User: Traffic rule: \"" + kExampleRule + "\"\n";
  out += "Assistant: " + example_mr(system_name) + "\n\n";
  out += "## Prompt\n";
  out += "You are given:\n";
  out += "1. Details of the MRs: ontology elements of Road Type, Manipulation and Ego-Vehicle "
         "Expected Behavior.\n";
  out += std::string(kRoadTypeListing) + join(roads, "; ") + "\n";
  out += std::string(kAddsListing) + join(adds, "; ") + "\n";
  out += std::string(kReplacesListing) + join(replaces, "; ") + "\n";
  out += std::string(kBehaviorListing) + join(behaviors, "; ") + "\n";
  out += "2. To ensure consistency, follow a step-by-step process to extract the MR from traffic "
         "rule.\n";
  out += "Step 1, Determine one appropriate Road Type ontology element based on the rule.\n";
  out += "Step 2, Determine one appropriate Manipulation ontology element based on the rule.\n";
  out += "Step 3, Determine the verb for Manipulation, use \"adds\" for objects with optional "
         "presence (e.g., pedestrians, vehicles), and \"replaces\" for objects with mandatory "
         "presence (e.g., weather, lighting conditions).\n";
  out += "Step 4, Determine one appropriate Ego-Vehicle Expected Behavior ontology element based "
         "on the rule.\n";
  out += "Finally, compose the MR using the selected elements in the following format:\n";
  out += "Given the ego-vehicle approaches to <Road Type>\n";
  out += "When " + std::string(system_name) + " <Manipulation>\n";
  out += "Then ego-vehicle should <Ego-Vehicle Expected Behavior>\n";
  out += "User: Traffic rule: \"" + std::string(rule) + "\"";
  return out;
}

const std::vector<std::string> & validation_questions()
{
  static const std::vector<std::string> questions{
    "Are Road Type, Manipulation, and Ego-Vehicle Expected Behavior all mentioned in the traffic "
    "rule?",
    "Is the traffic rule supported by MR?",
    "Are all parts of the MR consistent with each other?",
  };
  return questions;
}

std::string mr_validation_prompt(
  std::string_view rule, std::string_view gherkin, std::string_view system_name)
{
  std::string out;
  out += "## Role Setting\n# CONTEXT # ";
  out += kValidationMarker;
  out += "\n";
  out += key_concepts();
  out += "Questions:\n";
  const auto & questions = validation_questions();
  for (std::size_t i = 0; i < questions.size(); ++i) {
    out += std::to_string(i + 1) + ". " + questions[i] + "\n";
  }
  out += "\n## Prompt\n";
  out += "# EXAMPLE # User: Traffic rule: \"" + kExampleRule + "\",\n";
  out += "MR: \"" + example_mr(system_name) + "\"\n";
  out += "Assistant: [\"yes\", \"yes\", \"yes\"]\n";
  out += "User: Traffic rule: \"" + std::string(rule) + "\",\nMR: \"" + std::string(gherkin) + "\"";
  return out;
}

std::string scene_analysis_prompt()
{
  return std::string(kSceneMarker) +
         " Describe the time of day, weather conditions, road type (such as intersection, "
         "crosswalk, etc.), and any objects around the ego-vehicle. Reply format: time: , "
         "weather: , road type: , objects: ";
}

std::string mr_match_prompt(
  std::string_view test_case_description, const std::vector<MatchCandidate> & candidates)
{
  std::string out;
  out += "## Role Setting\n";
  out += "You are an assistant for question-answering tasks. Use the following pieces of "
         "retrieved context to answer the question.\n\n";
  out += "## Retrieved context\n";
  for (const auto & c : candidates) {
    out += std::string(kCandidatePrefix) + std::to_string(c.index) + "; Road Type: " + c.road_type +
           "; Manipulation: " + c.manipulation + "; Ego-Vehicle Expected Behavior: " +
           c.expected_behavior + "; Execution Count: " + std::to_string(c.execution_count) +
           "; MR: " + text::replace_all(c.gherkin, "\n", " / ") + "\n";
  }
  out += "\n## Prompt\n";
  out += "#Given the test case description: T-Agent output, ";
  out += kMatchMarker;
  out += "\n";
  out += "1. The Time, Weather, Road type, and Objects in the T-Agent output should best match "
         "those in the MR.\n";
  out += "2. Ego-vehicle's speed and steering angle should match in this MR.\n";
  out += "3. Among all matched MRs, prefer the one with the lowest Execution Count value.\n";
  out += "Reply format: Index: <MR index>\nRationale: <one sentence>\n";
  out += "User: " + std::string(test_case_description);
  return out;
}

std::string scenario_alignment_prompt()
{
  return std::string(kAlignmentMarker) +
         " The first image is from the source test case and the second image is from the "
         "follow-up test case. Is the road type the same in both scenes? Reply with yes or no.";
}

std::string manipulation_verification_prompt(std::string_view manipulation)
{
  return std::string(kVerificationMarker) +
         " The first image is the original and the second image is the edited follow-up. Does the "
         "visual change between them align with the manipulation below? Reply with yes or no.\n" +
         std::string(kManipulationQuote) + std::string(manipulation) + "\"";
}

}  // namespace automt::prompts
