#include "sumforge/errors.hpp"
#include "sumforge/llm.hpp"

#include <httplib.h>

namespace sumforge {

HttpChatBackend::HttpChatBackend(std::string endpoint_url, std::string api_key, std::chrono::seconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  const std::size_t scheme_end = endpoint_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidConfig, "endpoint must be an absolute http(s) URL: " + endpoint_url);
  }
  const std::size_t path_begin = endpoint_url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) {
    scheme_host_port_ = endpoint_url;
    path_ = "/";
  } else {
    scheme_host_port_ = endpoint_url.substr(0, path_begin);
    path_ = endpoint_url.substr(path_begin);
  }
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  const std::string body = dump_line(to_wire_json(request));
  auto response = client.Post(path_, headers, body, "application/json");
  if (!response) {
    throw BackendError("transport error: " + httplib::to_string(response.error()), true);
  }
  const int status = response->status;
  if (status < 200 || status >= 300) {
    const bool retryable = status == 408 || status == 429 || status >= 500;
    throw BackendError("HTTP " + std::to_string(status) + " from " + scheme_host_port_ + path_, retryable);
  }
  return parse_completion_response(response->body);
}

}  // namespace sumforge
