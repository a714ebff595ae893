#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

namespace personaflow {

struct HttpRequest {
  std::string method = "GET";
  std::string url;  // absolute
  std::map<std::string, std::string> headers;
  std::string body;
  std::chrono::milliseconds timeout{10000};
};

struct HttpResponse {
  int status = 0;
  std::map<std::string, std::string> headers;  // keys lowercased
  std::string body;

  std::string header(const std::string& lowercase_name) const {
    auto it = headers.find(lowercase_name);
    return it == headers.end() ? std::string{} : it->second;
  }
};

/// Blocking HTTP round trip. Connection failures and timeouts throw Error(kIo);
/// any HTTP status is returned as a response.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// Real network transport (cpp-httplib). Every request bumps network_request_count().
class NetworkTransport final : public HttpTransport {
 public:
  HttpResponse send(const HttpRequest& request) override;
};

/// Process-wide count of requests that went through NetworkTransport.
std::uint64_t network_request_count();

struct Url {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;  // includes query, starts with '/'
};

/// Parses scheme://host[:port][/path]. Returns nullopt when the text is not an absolute http(s) URL.
std::optional<Url> parse_url(std::string_view text);
std::string url_encode(std::string_view text);
std::string url_decode(std::string_view text);
/// Splits "a=1&b=2" into a map (later keys win).
std::map<std::string, std::string> parse_query(std::string_view query);

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

/// Token bucket shared by everything that talks to the hosting service.
class RateBudget {
 public:
  RateBudget(double tokens_per_second, double burst);
  /// Blocks until a token is available.
  void acquire();
  static std::shared_ptr<RateBudget> global();

 private:
  std::mutex mutex_;
  double rate_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

}  // namespace personaflow
