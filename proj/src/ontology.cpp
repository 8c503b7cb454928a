#include "automt/ontology.hpp"

#include "automt/error.hpp"
#include "automt/io.hpp"
#include "automt/text.hpp"

namespace automt::ontology
{

std::string to_string(Category category)
{
  switch (category) {
    case Category::TrafficInfrastructure: return "TrafficInfrastructure";
    case Category::Object: return "Object";
    case Category::Environment: return "Environment";
  }
  return "Object";
}

std::string to_string(Presence presence)
{
  return presence == Presence::Optional ? "Optional" : "Mandatory";
}

std::string to_string(Verb verb) { return verb == Verb::Adds ? "adds" : "replaces"; }

std::string to_string(Slot slot)
{
  switch (slot) {
    case Slot::RoadType: return "RoadType";
    case Slot::Manipulation: return "Manipulation";
    case Slot::Behavior: return "Behavior";
  }
  return "RoadType";
}

Category category_from_string(std::string_view value)
{
  auto v = text::canonicalize(value);
  if (v == "trafficinfrastructure" || v == "traffic infrastructure" || v == "infrastructure") {
    return Category::TrafficInfrastructure;
  }
  if (v == "object") return Category::Object;
  if (v == "environment") return Category::Environment;
  throw ParseError("unknown manipulation category '" + std::string(value) + "'");
}

Presence presence_from_string(std::string_view value)
{
  auto v = text::canonicalize(value);
  if (v == "optional") return Presence::Optional;
  if (v == "mandatory") return Presence::Mandatory;
  throw ParseError("unknown presence '" + std::string(value) + "'");
}

Verb verb_from_string(std::string_view value)
{
  auto v = text::canonicalize(value);
  if (v == "adds" || v == "add") return Verb::Adds;
  if (v == "replaces" || v == "replace") return Verb::Replaces;
  throw ParseError("unknown verb '" + std::string(value) + "'");
}

Verb verb_for(const ManipulationTarget & target)
{
  return target.presence == Presence::Optional ? Verb::Adds : Verb::Replaces;
}

const std::vector<std::string> & default_behaviors()
{
  static const std::vector<std::string> behaviors{
    "slow down", "turn left", "turn right", "keep current"};
  return behaviors;
}

namespace
{

std::set<std::string> canonical_set(const std::vector<std::string> & values, std::string_view what)
{
  std::set<std::string> out;
  for (const auto & raw : values) {
    auto value = text::canonicalize(raw);
    if (value.empty()) throw ParseError("blank entry in " + std::string(what));
    if (!out.insert(value).second) {
      throw DuplicateEntry("duplicate " + std::string(what) + " entry '" + value + "'");
    }
  }
  if (out.empty()) throw EmptyCategory(std::string(what) + " must not be empty");
  return out;
}

std::vector<std::string> string_array(const nlohmann::json & document, const char * key)
{
  if (!document.contains(key)) throw ParseError(std::string("taxonomy is missing '") + key + "'");
  const auto & node = document.at(key);
  if (!node.is_array()) throw ParseError(std::string("'") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto & item : node) {
    if (!item.is_string()) throw ParseError(std::string("'") + key + "' entries must be strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

OntologyTaxonomy::OntologyTaxonomy(
  std::vector<std::string> road_types, std::vector<ManipulationTarget> manipulations,
  std::vector<std::string> behaviors, std::string region)
: road_types_(canonical_set(road_types, "road_types")),
  behaviors_(canonical_set(behaviors, "behaviors")),
  region_(text::trim(region))
{
  if (manipulations.empty()) throw EmptyCategory("manipulations must not be empty");
  std::set<std::string> names;
  for (auto target : manipulations) {
    target.name = text::canonicalize(target.name);
    target.subcategory = text::canonicalize(target.subcategory);
    if (target.name.empty()) throw ParseError("blank manipulation name");
    if (target.category == Category::Environment && target.presence != Presence::Mandatory) {
      throw ParseError("environment target '" + target.name + "' must have mandatory presence");
    }
    if (target.category == Category::Object && target.presence != Presence::Optional) {
      throw ParseError("object target '" + target.name + "' must have optional presence");
    }
    if (target.category != Category::TrafficInfrastructure) target.subcategory.clear();
    if (!names.insert(target.name).second) {
      throw DuplicateEntry("duplicate manipulation entry '" + target.name + "'");
    }
    manipulations_.push_back(std::move(target));
  }
}

bool OntologyTaxonomy::is_member(Slot slot, std::string_view value) const
{
  auto v = text::canonicalize(value);
  switch (slot) {
    case Slot::RoadType: return v == kAnyRoads || road_types_.count(v) > 0;
    case Slot::Manipulation: return find_target(v) != nullptr;
    case Slot::Behavior: return behaviors_.count(v) > 0;
  }
  return false;
}

const ManipulationTarget * OntologyTaxonomy::find_target(std::string_view name) const
{
  auto v = text::canonicalize(name);
  for (const auto & target : manipulations_) {
    if (target.name == v) return &target;
  }
  return nullptr;
}

const ManipulationTarget * OntologyTaxonomy::resolve_target(std::string_view phrase) const
{
  auto p = text::canonicalize(phrase);
  const ManipulationTarget * best = nullptr;
  for (const auto & target : manipulations_) {
    bool hit = text::contains_word(p, target.name) || text::contains_word(p, target.name + "s") ||
               text::contains_word(p, target.name + "es");
    if (hit && (best == nullptr || target.name.size() > best->name.size())) best = &target;
  }
  return best;
}

nlohmann::json OntologyTaxonomy::to_json() const
{
  nlohmann::json doc;
  doc["region"] = region_;
  doc["road_types"] = road_types_;
  doc["behaviors"] = behaviors_;
  auto & manipulations = doc["manipulations"] = nlohmann::json::array();
  for (const auto & target : manipulations_) {
    manipulations.push_back(
      {{"category", to_string(target.category)},
       {"subcategory", target.subcategory},
       {"name", target.name},
       {"presence", to_string(target.presence)}});
  }
  return doc;
}

OntologyTaxonomy load_taxonomy(const nlohmann::json & document)
{
  if (!document.is_object()) throw ParseError("taxonomy document must be a JSON object");
  auto road_types = string_array(document, "road_types");
  auto behaviors = string_array(document, "behaviors");
  if (!document.contains("region") || !document.at("region").is_string()) {
    throw ParseError("taxonomy is missing string 'region'");
  }
  if (!document.contains("manipulations") || !document.at("manipulations").is_array()) {
    throw ParseError("taxonomy is missing array 'manipulations'");
  }
  std::vector<ManipulationTarget> targets;
  for (const auto & item : document.at("manipulations")) {
    if (!item.is_object() || !item.contains("category") || !item.contains("name")) {
      throw ParseError("manipulation entries need 'category' and 'name'");
    }
    ManipulationTarget target;
    target.category = category_from_string(item.at("category").get<std::string>());
    target.name = item.at("name").get<std::string>();
    target.subcategory = item.value("subcategory", std::string{});
    if (item.contains("presence")) {
      target.presence = presence_from_string(item.at("presence").get<std::string>());
    } else {
      target.presence =
        target.category == Category::Environment ? Presence::Mandatory : Presence::Optional;
    }
    targets.push_back(std::move(target));
  }
  return OntologyTaxonomy(
    std::move(road_types), std::move(targets), std::move(behaviors),
    document.at("region").get<std::string>());
}

OntologyTaxonomy parse_taxonomy(std::string_view json_text)
{
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(std::string("taxonomy is not valid JSON: ") + e.what());
  }
  return load_taxonomy(document);
}

OntologyTaxonomy load_taxonomy_file(const std::filesystem::path & path)
{
  return parse_taxonomy(io::read_file(path));
}

}  // namespace automt::ontology
