#pragma once

#include "automt/backends/client.hpp"

#include <cstdint>
#include <memory>
#include <string>

namespace automt::backends
{

/// Plain-HTTP transport (cpp-httplib). TLS termination belongs to a proxy.
class HttpTransport : public Transport
{
public:
  explicit HttpTransport(const BackendEndpoint & endpoint);

  nlohmann::json post(
    std::string_view route, const nlohmann::json & body, const std::string & request_id) override;

private:
  std::string host_;
  int port_ = 80;
  std::string prefix_;
  int timeout_ms_;
  std::string bearer_token_;
};

/// Resolves "mock:..." to an in-process MockTransport and "http://..." to an
/// HttpTransport. `mock_seed` applies when the url does not carry seed=.
std::shared_ptr<Transport> make_transport(const BackendEndpoint & endpoint, std::uint64_t mock_seed);
std::shared_ptr<BackendClient> make_client(BackendEndpoint endpoint, std::uint64_t mock_seed);

/// AUTOMT_BACKEND_<KIND>_URL when set, else `fallback`.
std::string url_from_env(BackendKind kind, const std::string & fallback);

/// AUTOMT_MOCK_SEED when set, else `fallback`.
std::uint64_t mock_seed_from_env(std::uint64_t fallback);

}  // namespace automt::backends
