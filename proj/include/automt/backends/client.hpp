#pragma once

#include "automt/backends/wire.hpp"
#include "automt/image.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace automt::backends
{

struct RetryPolicy
{
  int max_retries = 2;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
};

struct BackendEndpoint
{
  BackendKind kind = BackendKind::Chat;
  std::string id;   // name used in lineage records
  std::string url;  // http://host:port or mock:<scenario-id>[?k=v&...]
  int timeout_ms = 60000;
  RetryPolicy retry;
  int max_images = 10;
  std::string bearer_token;

  bool is_mock() const { return url.rfind("mock:", 0) == 0; }
};

/// Carries one JSON request to a backend and returns the JSON reply body.
/// Implementations throw TransportFailure for retryable failures and the
/// mapped engine error (EditRejected, ProtocolError, ...) otherwise.
class Transport
{
public:
  virtual ~Transport() = default;
  virtual nlohmann::json post(
    std::string_view route, const nlohmann::json & body, const std::string & request_id) = 0;
};

struct MaskRequest
{
  std::vector<std::string> mask_classes;
  std::string placement;  // "on_road" | "roadside"
};

enum class EditMode { Add, Replace };

struct Telemetry
{
  std::vector<double> speed_mps;
  std::vector<double> steering_rad;
};

/// Typed client over the uniform wire protocol. Thread-safe; concurrent
/// requests share the response cache keyed by request id.
class BackendClient
{
public:
  BackendClient(BackendEndpoint endpoint, std::shared_ptr<Transport> transport);

  const BackendEndpoint & endpoint() const noexcept { return endpoint_; }

  std::string chat(std::string_view prompt, std::span<const Image> images = {});
  std::vector<std::vector<float>> embed(std::span<const std::string> texts);
  Image edit(
    const Image & image, const std::optional<MaskRequest> & mask, std::string_view instruction,
    EditMode mode);
  std::vector<Image> video(
    const Image & keyframe, std::span<const double> speed_mps, std::span<const double> steering_rad,
    int frame_count);
  Telemetry predict(std::span<const Image> frames);

  /// Number of requests that actually reached the transport.
  std::size_t transport_calls() const noexcept { return transport_calls_.load(); }

  void set_cache_enabled(bool enabled) { cache_enabled_ = enabled; }

private:
  nlohmann::json call(std::string_view route, const nlohmann::json & body);
  void require_kind(std::initializer_list<BackendKind> kinds, const char * op) const;

  BackendEndpoint endpoint_;
  std::shared_ptr<Transport> transport_;
  std::atomic<std::size_t> transport_calls_{0};
  bool cache_enabled_ = true;
  std::mutex cache_mutex_;
  std::map<std::string, nlohmann::json> cache_;
  std::optional<std::size_t> embed_dimension_;
};

std::string image_to_b64(const Image & image);
Image image_from_b64(std::string_view encoded);

}  // namespace automt::backends
