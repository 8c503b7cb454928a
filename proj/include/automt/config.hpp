#pragma once

#include "automt/backends/client.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace automt::config
{

struct Thresholds
{
  double acceptance_score = 1.0 / 3.0;
  double v_min = 1.0;
  double epsilon = 0.05;
  double band_k = 1.0;
  std::size_t top_k = 5;
};

using NamedUrl = std::pair<std::string, std::string>;

/// Every knob of a pipeline run. Relative paths resolve against base_dir.
struct RunConfig
{
  std::string region = "de";
  std::string taxonomy;
  std::string rules;
  std::string corpus;
  std::string output = "run";
  std::size_t parallel = 1;
  std::uint64_t seed = 0;
  std::string system_name = "AutoMT";
  std::string label = "AutoMT";
  std::size_t frame_cap = 10;
  std::string sign_convention = "left_positive";
  Thresholds thresholds;
  // chat, vision, embed, edit, video, validator
  std::map<std::string, std::string> backends;
  std::vector<NamedUrl> parsers;  // configured order is the tie-break order
  std::vector<NamedUrl> ads;
  std::filesystem::path base_dir = ".";

  std::filesystem::path resolve(const std::string & path) const;
  bool all_mock() const;
};

/// Backend roles every run needs, with the wire kind each one speaks.
const std::vector<std::pair<std::string, backends::BackendKind>> & backend_roles();

/// `key = value` lines with optional [section] headers. Values are quoted
/// strings, integers, reals or booleans; '#' starts a comment.
RunConfig parse_config(std::string_view text, const std::filesystem::path & base_dir = ".");
RunConfig load_config(const std::filesystem::path & path);

/// AUTOMT_BACKEND_<KIND>_URL for chat (also validator and parsers), vision,
/// embed, edit, video and predict (all ADSs); AUTOMT_MOCK_SEED for the seed.
void apply_environment(RunConfig & config);

/// "role=url,role=url" where role is a [backends] key, parser.<name> or ads.<name>.
void apply_backend_overrides(RunConfig & config, std::string_view table);

/// Keeps the named parser profiles in the given order.
void select_parsers(RunConfig & config, std::string_view names);

/// Throws ConfigError when a threshold is out of range or a role is missing.
void validate(const RunConfig & config);

/// Effective-config snapshot. The output root is left out so the hash does
/// not depend on where a run is written; the hash also ignores `parallel`.
std::string snapshot(const RunConfig & config);
std::string config_hash(const RunConfig & config);

backends::BackendEndpoint endpoint(
  const RunConfig & config, const std::string & id, const std::string & url, backends::BackendKind kind);

}  // namespace automt::config
