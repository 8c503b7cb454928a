#include "automt/backends/wire.hpp"

#include "automt/error.hpp"
#include "automt/io.hpp"
#include "automt/text.hpp"

#include <initializer_list>
#include <set>

namespace automt::backends
{

std::string to_string(BackendKind kind)
{
  switch (kind) {
    case BackendKind::Chat: return "chat";
    case BackendKind::Vision: return "vision";
    case BackendKind::Embed: return "embed";
    case BackendKind::Edit: return "edit";
    case BackendKind::Video: return "video";
    case BackendKind::Predict: return "predict";
  }
  return "chat";
}

BackendKind kind_from_string(std::string_view value)
{
  auto v = text::canonicalize(value);
  if (v == "chat") return BackendKind::Chat;
  if (v == "vision") return BackendKind::Vision;
  if (v == "embed") return BackendKind::Embed;
  if (v == "edit") return BackendKind::Edit;
  if (v == "video") return BackendKind::Video;
  if (v == "predict") return BackendKind::Predict;
  throw ConfigError("unknown backend kind '" + std::string(value) + "'");
}

std::string route_for(BackendKind kind)
{
  switch (kind) {
    case BackendKind::Chat:
    case BackendKind::Vision: return std::string(routes::kChat);
    case BackendKind::Embed: return std::string(routes::kEmbed);
    case BackendKind::Edit: return std::string(routes::kEdit);
    case BackendKind::Video: return std::string(routes::kVideo);
    case BackendKind::Predict: return std::string(routes::kPredict);
  }
  return std::string(routes::kChat);
}

namespace
{

using nlohmann::json;

[[noreturn]] void fail(std::string_view route, const std::string & message)
{
  throw ProtocolError(std::string(route) + ": " + message);
}

void only_keys(std::string_view route, const json & body, std::initializer_list<const char *> keys)
{
  if (!body.is_object()) fail(route, "body must be a JSON object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto & [key, value] : body.items()) {
    if (allowed.count(key) == 0) fail(route, "unexpected field '" + key + "'");
  }
}

const json & required(std::string_view route, const json & body, const char * key)
{
  if (!body.contains(key)) fail(route, std::string("missing field '") + key + "'");
  return body.at(key);
}

void string_field(std::string_view route, const json & body, const char * key)
{
  if (!required(route, body, key).is_string()) {
    fail(route, std::string("'") + key + "' must be a string");
  }
}

void string_array(std::string_view route, const json & node, const char * key, bool non_empty)
{
  if (!node.is_array()) fail(route, std::string("'") + key + "' must be an array");
  if (non_empty && node.empty()) fail(route, std::string("'") + key + "' must not be empty");
  for (const auto & item : node) {
    if (!item.is_string()) fail(route, std::string("'") + key + "' entries must be strings");
  }
}

void number_array(std::string_view route, const json & node, const char * key)
{
  if (!node.is_array()) fail(route, std::string("'") + key + "' must be an array");
  for (const auto & item : node) {
    if (!item.is_number()) fail(route, std::string("'") + key + "' entries must be numbers");
  }
}

}  // namespace

void validate_request(std::string_view route, const json & body)
{
  if (route == routes::kChat) {
    only_keys(route, body, {"prompt", "images"});
    string_field(route, body, "prompt");
    if (body.contains("images")) string_array(route, body.at("images"), "images", false);
  } else if (route == routes::kEmbed) {
    only_keys(route, body, {"texts"});
    string_array(route, required(route, body, "texts"), "texts", true);
  } else if (route == routes::kEdit) {
    only_keys(route, body, {"image_b64", "mask_classes", "placement", "instruction", "mode"});
    string_field(route, body, "image_b64");
    string_field(route, body, "instruction");
    string_field(route, body, "mode");
    auto mode = body.at("mode").get<std::string>();
    if (mode != "add" && mode != "replace") fail(route, "'mode' must be add or replace");
    if (body.contains("mask_classes")) {
      string_array(route, body.at("mask_classes"), "mask_classes", true);
    }
    if (body.contains("placement")) {
      string_field(route, body, "placement");
      auto placement = body.at("placement").get<std::string>();
      if (placement != "on_road" && placement != "roadside" && placement != "global") {
        fail(route, "'placement' must be on_road, roadside or global");
      }
    }
  } else if (route == routes::kVideo) {
    only_keys(route, body, {"image_b64", "speed_mps", "steering_rad", "frame_count"});
    string_field(route, body, "image_b64");
    number_array(route, required(route, body, "speed_mps"), "speed_mps");
    number_array(route, required(route, body, "steering_rad"), "steering_rad");
    const auto & count = required(route, body, "frame_count");
    if (!count.is_number_integer() || count.get<long long>() < 1) {
      fail(route, "'frame_count' must be a positive integer");
    }
  } else if (route == routes::kPredict) {
    only_keys(route, body, {"frames"});
    string_array(route, required(route, body, "frames"), "frames", true);
  } else {
    fail(route, "unknown route");
  }
}

void validate_response(std::string_view route, const json & body)
{
  if (route == routes::kChat) {
    only_keys(route, body, {"text"});
    string_field(route, body, "text");
  } else if (route == routes::kEmbed) {
    only_keys(route, body, {"vectors"});
    const auto & vectors = required(route, body, "vectors");
    if (!vectors.is_array()) fail(route, "'vectors' must be an array");
    for (const auto & v : vectors) number_array(route, v, "vectors");
  } else if (route == routes::kEdit) {
    only_keys(route, body, {"image_b64"});
    string_field(route, body, "image_b64");
  } else if (route == routes::kVideo) {
    only_keys(route, body, {"frames"});
    string_array(route, required(route, body, "frames"), "frames", false);
  } else if (route == routes::kPredict) {
    only_keys(route, body, {"speed_mps", "steering_rad"});
    number_array(route, required(route, body, "speed_mps"), "speed_mps");
    number_array(route, required(route, body, "steering_rad"), "steering_rad");
  } else {
    fail(route, "unknown route");
  }
}

void validate_error_body(const json & body)
{
  only_keys("error", body, {"code", "message"});
  string_field("error", body, "code");
  string_field("error", body, "message");
}

std::string request_id(std::string_view route, const json & body)
{
  auto payload = std::string(route) + "\n" + io::dump(body);
  return text::hex64(text::fnv1a64(payload));
}

void raise_error_reply(int status, const json & body)
{
  std::string code = "unknown";
  std::string message = "backend returned status " + std::to_string(status);
  if (body.is_object()) {
    code = body.value("code", code);
    message = body.value("message", message);
  }
  if (code == "edit_rejected") throw EditRejected(message);
  if (code == "video_rejected") throw VideoRejected(message);
  if (code == "upstream_timeout" || status == 504) throw Timeout(message);
  if (status >= 500 || status == 429) throw TransportFailure(code + ": " + message);
  throw ProtocolError(code + ": " + message);
}

}  // namespace automt::backends
