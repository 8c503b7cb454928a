#pragma once

#include "automt/backends/client.hpp"
#include "automt/image.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace automt::backends
{

/// Canonical reply of a strict mock when no scripted rule matches.
inline constexpr std::string_view kRefusalMarker = "[[mock:refusal]]";

/// Parsed form of "mock:<scenario>?key=value&...".
///
/// Scenarios: "default" synthesizes every reply from seeded hashes, "strict"
/// answers only scripted prompts, "canned" replays the worked examples of the
/// prompt templates before falling back to synthesis.
struct MockScenario
{
  std::string name = "default";
  std::uint64_t seed = 0;
  std::map<std::string, std::string> params;
  // {"chat": [{"kind"?, "pattern", "response"}], "embed": [{"pattern", "vector"}],
  //  "predict": {"<case id>": "<mode>"}}
  nlohmann::json script = nlohmann::json::object();

  double number(const std::string & key, double fallback) const;
  std::string string(const std::string & key, const std::string & fallback) const;
};

MockScenario parse_mock_url(std::string_view url, std::uint64_t default_seed);

/// In-process endpoint. Every reply is a pure function of (scenario, request).
class MockTransport : public Transport
{
public:
  MockTransport(BackendKind kind, MockScenario scenario);

  nlohmann::json post(
    std::string_view route, const nlohmann::json & body, const std::string & request_id) override;

  const MockScenario & scenario() const noexcept { return scenario_; }

private:
  nlohmann::json chat(const nlohmann::json & body) const;
  nlohmann::json embed(const nlohmann::json & body) const;
  nlohmann::json edit(const nlohmann::json & body) const;
  nlohmann::json video(const nlohmann::json & body) const;
  nlohmann::json predict(const nlohmann::json & body) const;

  BackendKind kind_;
  MockScenario scenario_;
  std::map<std::uint32_t, std::string> predict_modes_;
};

/// Seeded hash-to-unit-vector: FNV-1a of the text, mixed with the seed, drives
/// a splitmix64 stream; D uniform draws in [-1, 1) are normalized.
std::vector<float> mock_embedding(std::string_view text, std::uint64_t seed, std::size_t dimension);

/// The deterministic edit applied by the mock edit endpoint. Add stamps an
/// instruction-colored rectangle (lower centre for on_road, right side for
/// roadside); Replace tints every row except the scene-tag row.
Image mock_edit(const Image & source, std::string_view instruction, EditMode mode, std::string_view placement);

/// Follow-up prediction modes understood by the mock predictor.
/// keep: identical to source; slow: speed x0.5; fast: speed x1.5;
/// left: steering +0.3 rad; right: steering -0.3 rad; stop: speed 0.
double apply_mode_speed(std::string_view mode, double speed);
double apply_mode_steering(std::string_view mode, double steering);

}  // namespace automt::backends
