#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace automt::ontology
{

/// Wildcard road type; always a member of every taxonomy.
inline constexpr std::string_view kAnyRoads = "any roads";

enum class Category { TrafficInfrastructure, Object, Environment };
enum class Presence { Optional, Mandatory };
enum class Verb { Adds, Replaces };
enum class Slot { RoadType, Manipulation, Behavior };

std::string to_string(Category category);
std::string to_string(Presence presence);
std::string to_string(Verb verb);
std::string to_string(Slot slot);
Category category_from_string(std::string_view value);
Presence presence_from_string(std::string_view value);
Verb verb_from_string(std::string_view value);

struct ManipulationTarget
{
  Category category = Category::Object;
  std::string subcategory;  // "sign", "light", "barrier", "line" for infrastructure
  std::string name;
  Presence presence = Presence::Optional;

  bool operator==(const ManipulationTarget &) const = default;
};

/// Optional presence takes "adds", mandatory presence takes "replaces".
Verb verb_for(const ManipulationTarget & target);

/// The closed vocabulary every MR slot must draw from. Immutable after load.
class OntologyTaxonomy
{
public:
  OntologyTaxonomy(
    std::vector<std::string> road_types, std::vector<ManipulationTarget> manipulations,
    std::vector<std::string> behaviors, std::string region);

  const std::set<std::string> & road_types() const noexcept { return road_types_; }
  const std::vector<ManipulationTarget> & manipulations() const noexcept { return manipulations_; }
  const std::set<std::string> & expected_behaviors() const noexcept { return behaviors_; }
  const std::string & region() const noexcept { return region_; }

  bool is_member(Slot slot, std::string_view value) const;
  const ManipulationTarget * find_target(std::string_view name) const;

  // Finds the target named inside a free manipulation phrase such as
  // "a maximum 50km/h speed limit sign". Longest whole-word match wins;
  // a trailing plural "s" on the phrase side is tolerated.
  const ManipulationTarget * resolve_target(std::string_view phrase) const;

  nlohmann::json to_json() const;

private:
  std::set<std::string> road_types_;
  std::vector<ManipulationTarget> manipulations_;
  std::set<std::string> behaviors_;
  std::string region_;
};

/// The four behaviors every default taxonomy carries.
const std::vector<std::string> & default_behaviors();

OntologyTaxonomy load_taxonomy(const nlohmann::json & document);
OntologyTaxonomy parse_taxonomy(std::string_view json_text);
OntologyTaxonomy load_taxonomy_file(const std::filesystem::path & path);

}  // namespace automt::ontology
