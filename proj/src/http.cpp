#include "personaflow/http.hpp"

#include <algorithm>
#include <cctype>
#include <thread>

#include <httplib.h>

#include "personaflow/errors.hpp"

namespace personaflow {

namespace {
std::atomic<std::uint64_t> g_network_requests{0};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}
}  // namespace

std::uint64_t network_request_count() { return g_network_requests.load(); }

std::optional<Url> parse_url(std::string_view text) {
  const auto scheme_end = text.find("://");
  if (scheme_end == std::string_view::npos) return std::nullopt;
  Url url;
  url.scheme = lower(std::string(text.substr(0, scheme_end)));
  if (url.scheme != "http" && url.scheme != "https") return std::nullopt;
  auto rest = text.substr(scheme_end + 3);
  const auto path_start = rest.find_first_of("/?#");
  auto authority = rest.substr(0, path_start);
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  if (authority.empty()) return std::nullopt;
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    url.host = std::string(authority.substr(0, colon));
    try {
      url.port = std::stoi(std::string(authority.substr(colon + 1)));
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (url.port <= 0 || url.port > 65535) return std::nullopt;
  } else {
    url.host = std::string(authority);
    url.port = url.scheme == "https" ? 443 : 80;
  }
  if (url.host.empty()) return std::nullopt;
  for (char c : url.host) {
    if (std::isspace(static_cast<unsigned char>(c))) return std::nullopt;
  }
  url.host = lower(url.host);
  url.path = path_start == std::string_view::npos ? "/" : std::string(rest.substr(path_start));
  if (const auto hash = url.path.find('#'); hash != std::string::npos) url.path.erase(hash);
  if (url.path.empty() || url.path[0] != '/') url.path.insert(0, "/");
  return url;
}

std::string url_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

std::string url_decode(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '%' && i + 2 < text.size() && std::isxdigit(static_cast<unsigned char>(text[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(text[i + 2]))) {
      out.push_back(static_cast<char>(std::stoi(std::string(text.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else if (text[i] == '+') {
      out.push_back(' ');
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

std::map<std::string, std::string> parse_query(std::string_view query) {
  std::map<std::string, std::string> out;
  while (!query.empty()) {
    const auto amp = query.find('&');
    const auto part = query.substr(0, amp);
    if (!part.empty()) {
      const auto eq = part.find('=');
      if (eq == std::string_view::npos) {
        out[url_decode(part)] = "";
      } else {
        out[url_decode(part.substr(0, eq))] = url_decode(part.substr(eq + 1));
      }
    }
    if (amp == std::string_view::npos) break;
    query.remove_prefix(amp + 1);
  }
  return out;
}

HttpResponse NetworkTransport::send(const HttpRequest& request) {
  const auto url = parse_url(request.url);
  if (!url) throw Error(ErrorCode::kInvalidArgument, "not an absolute URL: " + request.url);
  ++g_network_requests;

  const std::string origin = url->scheme + "://" + url->host + ":" + std::to_string(url->port);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url->scheme == "https") throw Error(ErrorCode::kIo, "built without TLS support: " + request.url);
#endif
  httplib::Client client(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  client.set_follow_location(true);

  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [k, v] : request.headers) {
    if (lower(k) == "content-type") {
      content_type = v;
    } else {
      headers.emplace(k, v);
    }
  }

  httplib::Result result;
  if (request.method == "GET") {
    result = client.Get(url->path, headers);
  } else if (request.method == "POST") {
    result = client.Post(url->path, headers, request.body, content_type);
  } else if (request.method == "PUT") {
    result = client.Put(url->path, headers, request.body, content_type);
  } else if (request.method == "DELETE") {
    result = client.Delete(url->path, headers, request.body, content_type);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unsupported method " + request.method);
  }
  if (!result) {
    throw Error(ErrorCode::kIo, "request to " + request.url + " failed: " + httplib::to_string(result.error()));
  }
  HttpResponse response;
  response.status = result->status;
  response.body = result->body;
  for (const auto& [k, v] : result->headers) response.headers[lower(k)] = v;
  return response;
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

RateBudget::RateBudget(double tokens_per_second, double burst)
    : rate_(tokens_per_second), burst_(burst), tokens_(burst), last_(std::chrono::steady_clock::now()) {}

void RateBudget::acquire() {
  std::unique_lock lock(mutex_);
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    const std::chrono::duration<double> elapsed = now - last_;
    tokens_ = std::min(burst_, tokens_ + elapsed.count() * rate_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

std::shared_ptr<RateBudget> RateBudget::global() {
  static auto budget = std::make_shared<RateBudget>(20.0, 40.0);
  return budget;
}

}  // namespace personaflow
