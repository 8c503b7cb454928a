#include "automt/backends/factory.hpp"

#include "automt/backends/mock.hpp"
#include "automt/error.hpp"
#include "automt/io.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace automt::backends
{

using nlohmann::json;

HttpTransport::HttpTransport(const BackendEndpoint & endpoint)
: timeout_ms_(endpoint.timeout_ms), bearer_token_(endpoint.bearer_token)
{
  const std::string scheme = "http://";
  if (endpoint.url.rfind(scheme, 0) != 0) {
    throw ConfigError("backend '" + endpoint.id + "': only http:// urls are supported, got " + endpoint.url);
  }
  auto rest = endpoint.url.substr(scheme.size());
  auto slash = rest.find('/');
  auto authority = rest.substr(0, slash);
  if (slash != std::string::npos) prefix_ = rest.substr(slash);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  auto colon = authority.rfind(':');
  host_ = authority.substr(0, colon);
  if (colon != std::string::npos) {
    try {
      port_ = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception &) {
      throw ConfigError("backend '" + endpoint.id + "': bad port in " + endpoint.url);
    }
  }
  if (host_.empty()) throw ConfigError("backend '" + endpoint.id + "': missing host in " + endpoint.url);
}

json HttpTransport::post(std::string_view route, const json & body, const std::string & request_id)
{
  httplib::Client client(host_, port_);
  auto seconds = timeout_ms_ / 1000;
  auto micros = (timeout_ms_ % 1000) * 1000;
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);
  httplib::Headers headers{{"X-Request-Id", request_id}};
  if (!bearer_token_.empty()) headers.emplace("Authorization", "Bearer " + bearer_token_);

  auto result = client.Post(prefix_ + std::string(route), headers, io::dump(body), "application/json");
  if (!result) {
    auto err = result.error();
    if (err == httplib::Error::ConnectionTimeout) throw Timeout("connection to " + host_ + " timed out");
    throw TransportFailure("http transport: " + httplib::to_string(err));
  }
  auto parsed = json::parse(result->body, nullptr, false);
  if (result->status < 200 || result->status >= 300) {
    if (!parsed.is_discarded()) {
      try {
        validate_error_body(parsed);
      } catch (const ProtocolError &) {
        parsed = json();
      }
    }
    raise_error_reply(result->status, parsed.is_discarded() ? json() : parsed);
  }
  if (parsed.is_discarded()) throw ProtocolError(std::string(route) + ": response is not JSON");
  return parsed;
}

std::shared_ptr<Transport> make_transport(const BackendEndpoint & endpoint, std::uint64_t mock_seed)
{
  if (endpoint.is_mock()) {
    return std::make_shared<MockTransport>(endpoint.kind, parse_mock_url(endpoint.url, mock_seed));
  }
  return std::make_shared<HttpTransport>(endpoint);
}

std::shared_ptr<BackendClient> make_client(BackendEndpoint endpoint, std::uint64_t mock_seed)
{
  auto transport = make_transport(endpoint, mock_seed);
  if (endpoint.is_mock()) endpoint.retry.initial_backoff = std::chrono::milliseconds(0);
  return std::make_shared<BackendClient>(std::move(endpoint), std::move(transport));
}

std::string url_from_env(BackendKind kind, const std::string & fallback)
{
  auto name = to_string(kind);
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
  const char * value = std::getenv(("AUTOMT_BACKEND_" + name + "_URL").c_str());
  return value && *value ? std::string(value) : fallback;
}

std::uint64_t mock_seed_from_env(std::uint64_t fallback)
{
  const char * value = std::getenv("AUTOMT_MOCK_SEED");
  if (!value || !*value) return fallback;
  try {
    return std::stoull(value);
  } catch (const std::exception &) {
    throw ConfigError(std::string("AUTOMT_MOCK_SEED is not an unsigned integer: ") + value);
  }
}

}  // namespace automt::backends
