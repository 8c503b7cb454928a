#include "automt/backends/client.hpp"

#include "automt/error.hpp"
#include "automt/text.hpp"

#include <algorithm>
#include <thread>

namespace automt::backends
{

using nlohmann::json;

std::string image_to_b64(const Image & image) { return text::base64_encode(encode_png(image)); }

Image image_from_b64(std::string_view encoded) { return decode_png(text::base64_decode(encoded)); }

BackendClient::BackendClient(BackendEndpoint endpoint, std::shared_ptr<Transport> transport)
: endpoint_(std::move(endpoint)), transport_(std::move(transport))
{
  if (!transport_) throw ConfigError("backend '" + endpoint_.id + "' has no transport");
}

void BackendClient::require_kind(std::initializer_list<BackendKind> kinds, const char * op) const
{
  if (std::find(kinds.begin(), kinds.end(), endpoint_.kind) == kinds.end()) {
    throw PreconditionError(
      std::string(op) + " is not supported by " + to_string(endpoint_.kind) + " endpoint '" +
      endpoint_.id + "'");
  }
}

json BackendClient::call(std::string_view route, const json & body)
{
  validate_request(route, body);
  auto id = request_id(route, body);
  if (cache_enabled_) {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(id); it != cache_.end()) return it->second;
  }

  auto backoff = endpoint_.retry.initial_backoff;
  std::string last_failure;
  bool last_was_timeout = false;
  for (int attempt = 0; attempt <= endpoint_.retry.max_retries; ++attempt) {
    if (attempt > 0 && backoff.count() > 0) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(backoff.count()) * endpoint_.retry.multiplier));
    }
    try {
      ++transport_calls_;
      auto reply = transport_->post(route, body, id);
      validate_response(route, reply);
      if (cache_enabled_) {
        std::lock_guard lock(cache_mutex_);
        cache_.emplace(id, reply);
      }
      return reply;
    } catch (const TransportFailure & e) {
      last_failure = e.what();
      last_was_timeout = false;
    } catch (const Timeout & e) {
      last_failure = e.what();
      last_was_timeout = true;
    }
  }
  auto attempts = std::to_string(endpoint_.retry.max_retries + 1);
  if (last_was_timeout) {
    throw Timeout("backend '" + endpoint_.id + "' timed out " + attempts + " times: " + last_failure);
  }
  throw BackendUnavailable(
    "backend '" + endpoint_.id + "' failed " + attempts + " attempts: " + last_failure);
}

std::string BackendClient::chat(std::string_view prompt, std::span<const Image> images)
{
  require_kind({BackendKind::Chat, BackendKind::Vision}, "chat");
  json body{{"prompt", std::string(prompt)}};
  if (!images.empty()) {
    auto & encoded = body["images"] = json::array();
    for (const auto & image : images) encoded.push_back(image_to_b64(image));
  }
  return call(routes::kChat, body).at("text").get<std::string>();
}

std::vector<std::vector<float>> BackendClient::embed(std::span<const std::string> texts)
{
  require_kind({BackendKind::Embed}, "embed");
  if (texts.empty()) throw PreconditionError("embed needs at least one text");
  json body{{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  auto reply = call(routes::kEmbed, body);
  const auto & vectors = reply.at("vectors");
  if (vectors.size() != texts.size()) {
    throw ProtocolError("embed returned " + std::to_string(vectors.size()) + " vectors for " +
                        std::to_string(texts.size()) + " texts");
  }
  std::vector<std::vector<float>> out;
  out.reserve(vectors.size());
  for (const auto & v : vectors) {
    auto vec = v.get<std::vector<float>>();
    if (vec.empty()) throw DimensionMismatch("embed returned an empty vector");
    if (!embed_dimension_) embed_dimension_ = vec.size();
    if (vec.size() != *embed_dimension_) {
      throw DimensionMismatch(
        "embedding dimension changed from " + std::to_string(*embed_dimension_) + " to " +
        std::to_string(vec.size()));
    }
    out.push_back(std::move(vec));
  }
  return out;
}

Image BackendClient::edit(
  const Image & image, const std::optional<MaskRequest> & mask, std::string_view instruction,
  EditMode mode)
{
  require_kind({BackendKind::Edit}, "edit");
  if (image.empty()) throw PreconditionError("edit needs a decodable image");
  json body{
    {"image_b64", image_to_b64(image)},
    {"instruction", std::string(instruction)},
    {"mode", mode == EditMode::Add ? "add" : "replace"}};
  if (mask) {
    body["mask_classes"] = mask->mask_classes;
    if (!mask->placement.empty()) body["placement"] = mask->placement;
  }
  return image_from_b64(call(routes::kEdit, body).at("image_b64").get<std::string>());
}

std::vector<Image> BackendClient::video(
  const Image & keyframe, std::span<const double> speed_mps, std::span<const double> steering_rad,
  int frame_count)
{
  require_kind({BackendKind::Video}, "video");
  if (frame_count < 1) throw PreconditionError("frame_count must be at least 1");
  if (speed_mps.size() != static_cast<std::size_t>(frame_count) ||
      steering_rad.size() != static_cast<std::size_t>(frame_count)) {
    throw PreconditionError("speed/steering series length must equal frame_count");
  }
  json body{
    {"image_b64", image_to_b64(keyframe)},
    {"speed_mps", std::vector<double>(speed_mps.begin(), speed_mps.end())},
    {"steering_rad", std::vector<double>(steering_rad.begin(), steering_rad.end())},
    {"frame_count", frame_count}};
  auto reply = call(routes::kVideo, body);
  const auto & frames = reply.at("frames");
  if (frames.size() != static_cast<std::size_t>(frame_count)) {
    throw VideoRejected(
      "video backend returned " + std::to_string(frames.size()) + " frames, expected " +
      std::to_string(frame_count));
  }
  std::vector<Image> out;
  out.reserve(frames.size());
  for (const auto & f : frames) out.push_back(image_from_b64(f.get<std::string>()));
  return out;
}

Telemetry BackendClient::predict(std::span<const Image> frames)
{
  require_kind({BackendKind::Predict}, "predict");
  if (frames.empty()) throw PreconditionError("predict needs at least one frame");
  json body{{"frames", json::array()}};
  for (const auto & frame : frames) body["frames"].push_back(image_to_b64(frame));
  auto reply = call(routes::kPredict, body);
  Telemetry out{
    reply.at("speed_mps").get<std::vector<double>>(),
    reply.at("steering_rad").get<std::vector<double>>()};
  if (out.speed_mps.size() != frames.size() || out.steering_rad.size() != frames.size()) {
    throw ProtocolError("predictor returned a series whose length differs from the frame count");
  }
  return out;
}

}  // namespace automt::backends
