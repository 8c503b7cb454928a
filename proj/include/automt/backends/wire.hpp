#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace automt::backends
{

enum class BackendKind { Chat, Vision, Embed, Edit, Video, Predict };

std::string to_string(BackendKind kind);
BackendKind kind_from_string(std::string_view value);

/// HTTP route for a capability. Chat and Vision share /v1/chat.
std::string route_for(BackendKind kind);

namespace routes
{
inline constexpr std::string_view kChat = "/v1/chat";
inline constexpr std::string_view kEmbed = "/v1/embed";
inline constexpr std::string_view kEdit = "/v1/edit";
inline constexpr std::string_view kVideo = "/v1/video";
inline constexpr std::string_view kPredict = "/v1/predict";
}  // namespace routes

// Structural checks for every request and response body. They throw
// ProtocolError naming the offending field.
void validate_request(std::string_view route, const nlohmann::json & body);
void validate_response(std::string_view route, const nlohmann::json & body);
void validate_error_body(const nlohmann::json & body);

/// Content hash of a request; doubles as idempotency key and cache key.
std::string request_id(std::string_view route, const nlohmann::json & body);

/// Converts a non-2xx reply into the matching engine exception.
[[noreturn]] void raise_error_reply(int status, const nlohmann::json & body);

/// Retryable transport failure (connection refused, 5xx, 429).
class TransportFailure : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace automt::backends
