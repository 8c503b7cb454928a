#include "automt/metamorphic_relation.hpp"

#include "automt/error.hpp"
#include "automt/text.hpp"

#include <array>
#include <optional>
#include <regex>

namespace automt::mr
{

using ontology::OntologyTaxonomy;
using ontology::Slot;
using ontology::Verb;

namespace
{

struct KnownSuffix
{
  std::string_view text;
  Placement placement;
};

constexpr std::array<KnownSuffix, 5> kKnownSuffixes{{
  {" on the roadside", Placement::Roadside},
  {" on the road side", Placement::Roadside},
  {" by the roadside", Placement::Roadside},
  {" by the road side", Placement::Roadside},
  {" on the road", Placement::OnRoad},
}};

bool ends_with(std::string_view value, std::string_view suffix)
{
  return value.size() >= suffix.size() &&
         value.substr(value.size() - suffix.size()) == suffix;
}

// Strips list bullets, heading marks and bold markers that chat models like to add.
std::string clean_line(std::string_view raw)
{
  auto line = text::replace_all(std::string(raw), "**", "");
  line = text::replace_all(line, "__", "");
  std::size_t start = 0;
  while (start < line.size() &&
         (line[start] == '*' || line[start] == '-' || line[start] == '>' || line[start] == '#' ||
          line[start] == ' ' || line[start] == '\t' || line[start] == '`')) {
    ++start;
  }
  auto out = text::trim(std::string_view(line).substr(start));
  while (!out.empty() && (out.back() == '.' || out.back() == ',' || out.back() == '`' ||
                          out.back() == '"')) {
    out.pop_back();
  }
  return text::trim(out);
}

bool starts_with_keyword(std::string_view line, std::string_view keyword)
{
  if (line.size() <= keyword.size()) return false;
  return text::to_lower(line.substr(0, keyword.size())) == keyword &&
         (line[keyword.size()] == ' ' || line[keyword.size()] == '\t');
}

std::string strip_leading_article(const std::string & value)
{
  for (std::string_view article : {"a ", "an ", "the "}) {
    if (value.rfind(article, 0) == 0) return value.substr(article.size());
  }
  return value;
}

// The object part of a manipulation phrase: placement suffix removed, and for
// "replaces X with Y" forms only the Y part.
std::string object_phrase(const std::string & manipulation, Verb verb)
{
  auto core = split_placement(manipulation).core;
  if (verb == Verb::Replaces) {
    auto pos = core.rfind(" with ");
    if (pos != std::string::npos) core = core.substr(pos + 6);
  }
  return core;
}

}  // namespace

PlacementSplit split_placement(std::string_view manipulation)
{
  auto phrase = text::canonicalize(manipulation);
  for (const auto & known : kKnownSuffixes) {
    if (ends_with(phrase, known.text)) {
      return {
        phrase.substr(0, phrase.size() - known.text.size()),
        std::string(known.text.substr(1)), known.placement};
    }
  }
  static const std::regex unknown_suffix(
    R"( ((on|by|near|beside|along|at|behind|next to|in front of) the [a-z0-9 /-]+)$)");
  std::smatch match;
  if (std::regex_search(phrase, match, unknown_suffix)) {
    return {phrase.substr(0, static_cast<std::size_t>(match.position(0))), match[1].str(),
            Placement::Unknown};
  }
  return {phrase, "", Placement::None};
}

std::string article_for(std::string_view road_type)
{
  auto canonical = text::canonicalize(road_type);
  if (canonical == ontology::kAnyRoads || canonical.empty()) return "";
  switch (canonical.front()) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
      return "an";
    default:
      return "a";
  }
}

std::string render_gherkin(const MetamorphicRelation & mr, std::string_view system_name)
{
  auto check_slot = [](const std::string & value, const char * what) {
    if (text::trim(value).empty()) throw InvalidMr(std::string(what) + " slot is empty");
    if (value.find_first_of("\r\n") != std::string::npos) {
      throw InvalidMr(std::string(what) + " slot contains a line break");
    }
  };
  check_slot(mr.road_type, "road type");
  check_slot(mr.manipulation, "manipulation");
  check_slot(mr.expected_behavior, "expected behavior");
  if (!(mr.hallucination_score >= 0.0 && mr.hallucination_score <= 1.0)) {
    throw InvalidMr("hallucination score outside [0, 1]");
  }
  if (system_name.empty() || system_name.find_first_of(" \t\r\n") != std::string_view::npos) {
    throw InvalidMr("system name must be a single token");
  }

  auto article = article_for(mr.road_type);
  std::string out = "Given the ego-vehicle approaches to ";
  if (!article.empty()) out += article + " ";
  out += mr.road_type;
  out += "\nWhen ";
  out += system_name;
  out += " " + ontology::to_string(mr.verb) + " " + mr.manipulation;
  out += "\nThen ego-vehicle should " + mr.expected_behavior;
  return out;
}

GherkinSlots parse_gherkin_slots(std::string_view input)
{
  std::vector<std::string> lines;
  for (const auto & raw : text::split_lines(input)) lines.push_back(clean_line(raw));

  std::optional<std::size_t> given_line, when_line, then_line;
  for (std::size_t g = lines.size(); g-- > 0;) {
    if (!starts_with_keyword(lines[g], "given")) continue;
    std::optional<std::size_t> w, t;
    for (std::size_t k = g + 1; k < lines.size(); ++k) {
      if (!w && starts_with_keyword(lines[k], "when")) {
        w = k;
      } else if (w && starts_with_keyword(lines[k], "then")) {
        t = k;
        break;
      }
    }
    if (w && t) {
      given_line = g;
      when_line = w;
      then_line = t;
      break;
    }
  }
  if (!given_line) {
    bool has_given = false;
    for (const auto & line : lines) has_given = has_given || starts_with_keyword(line, "given");
    throw GrammarError(
      has_given ? "Given line is not followed by When and Then lines"
                : "no Given/When/Then block found");
  }

  static const std::regex given_re(
    R"(^given\s+(the\s+)?ego[- ]vehicle\s+approaches\s+(to\s+)?(.+)$)", std::regex::icase);
  static const std::regex when_re(R"(^when\s+(\S+)\s+(adds|replaces)\s+(.+)$)", std::regex::icase);
  static const std::regex then_re(
    R"(^then\s+(the\s+)?ego[- ]vehicle\s+should\s+(.+)$)", std::regex::icase);

  GherkinSlots slots;
  std::smatch m;
  if (!std::regex_match(lines[*given_line], m, given_re)) {
    throw GrammarError("malformed Given line: " + lines[*given_line]);
  }
  slots.road_type = strip_leading_article(text::canonicalize(m[3].str()));
  if (!std::regex_match(lines[*when_line], m, when_re)) {
    throw GrammarError("malformed When line: " + lines[*when_line]);
  }
  slots.system_token = m[1].str();
  slots.verb = ontology::verb_from_string(m[2].str());
  slots.manipulation = text::canonicalize(m[3].str());
  if (!std::regex_match(lines[*then_line], m, then_re)) {
    throw GrammarError("malformed Then line: " + lines[*then_line]);
  }
  slots.expected_behavior = text::canonicalize(m[2].str());
  if (slots.road_type.empty() || slots.manipulation.empty() || slots.expected_behavior.empty()) {
    throw GrammarError("empty Given/When/Then slot");
  }
  return slots;
}

ParsedMr parse_gherkin_detailed(std::string_view text_in, const OntologyTaxonomy & taxonomy)
{
  auto slots = parse_gherkin_slots(text_in);
  ParsedMr parsed;
  auto & mr = parsed.mr;
  mr.road_type = slots.road_type;
  mr.verb = slots.verb;
  mr.manipulation = slots.manipulation;
  mr.expected_behavior = slots.expected_behavior;
  mr.region = taxonomy.region();

  if (!taxonomy.is_member(Slot::RoadType, mr.road_type)) {
    throw OntologyViolation(ontology::to_string(Slot::RoadType), mr.road_type);
  }

  if (!taxonomy.is_member(Slot::Behavior, mr.expected_behavior)) {
    constexpr std::string_view kSpeed = " speed";
    auto shortened = mr.expected_behavior;
    if (ends_with(shortened, kSpeed)) shortened.resize(shortened.size() - kSpeed.size());
    if (shortened != mr.expected_behavior && taxonomy.is_member(Slot::Behavior, shortened)) {
      parsed.warnings.push_back(
        "behavior '" + mr.expected_behavior + "' normalized to '" + shortened + "'");
      mr.expected_behavior = shortened;
    } else {
      throw OntologyViolation(ontology::to_string(Slot::Behavior), mr.expected_behavior);
    }
  }

  const auto * target = taxonomy.resolve_target(object_phrase(mr.manipulation, mr.verb));
  if (target == nullptr) {
    throw OntologyViolation(
      ontology::to_string(Slot::Manipulation), object_phrase(mr.manipulation, mr.verb));
  }
  if (ontology::verb_for(*target) != mr.verb) {
    throw VerbMismatch(
      "'" + target->name + "' takes '" + ontology::to_string(ontology::verb_for(*target)) +
      "', not '" + ontology::to_string(mr.verb) + "'");
  }

  auto split = split_placement(mr.manipulation);
  if (split.placement == Placement::Unknown) {
    parsed.warnings.push_back("unknown placement suffix '" + split.suffix + "' kept verbatim");
  }
  return parsed;
}

MetamorphicRelation parse_gherkin(std::string_view text_in, const OntologyTaxonomy & taxonomy)
{
  return parse_gherkin_detailed(text_in, taxonomy).mr;
}

const ontology::ManipulationTarget * target_of(
  const MetamorphicRelation & mr, const OntologyTaxonomy & taxonomy)
{
  return taxonomy.resolve_target(object_phrase(text::canonicalize(mr.manipulation), mr.verb));
}

void validate(const MetamorphicRelation & mr, const OntologyTaxonomy & taxonomy)
{
  if (!(mr.hallucination_score >= 0.0 && mr.hallucination_score <= 1.0)) {
    throw InvalidMr("hallucination score outside [0, 1]");
  }
  if (!taxonomy.is_member(Slot::RoadType, mr.road_type)) {
    throw OntologyViolation(ontology::to_string(Slot::RoadType), mr.road_type);
  }
  if (!taxonomy.is_member(Slot::Behavior, mr.expected_behavior)) {
    throw OntologyViolation(ontology::to_string(Slot::Behavior), mr.expected_behavior);
  }
  const auto * target = target_of(mr, taxonomy);
  if (target == nullptr) {
    throw OntologyViolation(ontology::to_string(Slot::Manipulation), mr.manipulation);
  }
  if (ontology::verb_for(*target) != mr.verb) {
    throw VerbMismatch("verb does not match presence of '" + target->name + "'");
  }
}

double answers_to_score(std::span<const Answer> answers)
{
  if (answers.size() != 3) {
    throw ArityError("expected 3 answers, got " + std::to_string(answers.size()));
  }
  int no_count = 0;
  for (auto answer : answers) no_count += answer == Answer::No ? 1 : 0;
  return static_cast<double>(no_count) / 3.0;
}

nlohmann::json to_record(const MetamorphicRelation & mr, std::string_view system_name)
{
  return {
    {"gherkin", render_gherkin(mr, system_name)},
    {"road_type", mr.road_type},
    {"verb", ontology::to_string(mr.verb)},
    {"manipulation", mr.manipulation},
    {"expected_behavior", mr.expected_behavior},
    {"source_rule", mr.source_rule},
    {"region", mr.region},
    {"hallucination_score", mr.hallucination_score},
  };
}

MetamorphicRelation from_record(const nlohmann::json & record)
{
  try {
    MetamorphicRelation mr;
    mr.road_type = record.at("road_type").get<std::string>();
    mr.verb = ontology::verb_from_string(record.at("verb").get<std::string>());
    mr.manipulation = record.at("manipulation").get<std::string>();
    mr.expected_behavior = record.at("expected_behavior").get<std::string>();
    mr.source_rule = record.value("source_rule", std::string{});
    mr.region = record.value("region", std::string{});
    mr.hallucination_score = record.value("hallucination_score", 0.0);
    return mr;
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(std::string("malformed MR record: ") + e.what());
  }
}

}  // namespace automt::mr
