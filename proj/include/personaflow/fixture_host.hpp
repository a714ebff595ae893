#pragma once

// Offline stand-in for the hosting service and the open web. Serves a
// recorded directory through the same REST paths the connector uses, either
// in-process (FixtureTransport) or over loopback HTTP (FixtureServer).
//
// Directory layout:
//   repos/<owner>/<name>/repo.json       repository metadata (REST shape)
//   repos/<owner>/<name>/README*         served by the readme endpoint (raw)
//   repos/<owner>/<name>/issues.json     array of issues (REST shape)
//   repos/<owner>/<name>/contents/<path> raw files for internal links
//   pages/index.json                     {"<absolute url>": "<file under pages/>"}

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "personaflow/http.hpp"

namespace personaflow {

struct FixtureFault {
  std::string url_contains;
  int status = 500;
  int remaining = -1;  // -1: forever
  int retry_after_seconds = 0;
};

class FixtureHost {
 public:
  explicit FixtureHost(std::filesystem::path root, std::string api_base = "https://api.github.com",
                       std::string raw_base = "https://raw.githubusercontent.com");

  HttpResponse handle(const HttpRequest& request);

  void add_fault(FixtureFault fault);
  void clear_faults();
  /// URLs seen so far, in arrival order.
  std::vector<std::string> requests() const;
  std::size_t request_count() const;

  const std::string& api_base() const { return api_base_; }
  const std::string& raw_base() const { return raw_base_; }
  const std::filesystem::path& root() const { return root_; }

 private:
  HttpResponse handle_api(const std::string& path, const HttpRequest& request);
  HttpResponse handle_raw(const std::string& path);
  HttpResponse handle_page(const std::string& url);

  std::filesystem::path root_;
  std::string api_base_;
  std::string raw_base_;
  mutable std::mutex mutex_;
  std::vector<FixtureFault> faults_;
  std::vector<std::string> log_;
};

class FixtureTransport final : public HttpTransport {
 public:
  explicit FixtureTransport(std::shared_ptr<FixtureHost> host) : host_(std::move(host)) {}
  HttpResponse send(const HttpRequest& request) override { return host_->handle(request); }

 private:
  std::shared_ptr<FixtureHost> host_;
};

/// Loopback HTTP server in front of a FixtureHost.
///   /api/...          -> hosting-service REST paths
///   /raw/...          -> raw content paths
///   /ext?url=<url>    -> external pages
class FixtureServer {
 public:
  explicit FixtureServer(std::shared_ptr<FixtureHost> host);
  ~FixtureServer();
  FixtureServer(const FixtureServer&) = delete;
  FixtureServer& operator=(const FixtureServer&) = delete;

  int port() const { return port_; }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::string api_base() const { return base_url() + "/api"; }
  std::string raw_base() const { return base_url() + "/raw"; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

/// Sends loopback URLs unchanged and rewrites every other absolute URL to the
/// fixture server's /ext route, so external links resolve offline.
class ExternalProxyTransport final : public HttpTransport {
 public:
  ExternalProxyTransport(std::shared_ptr<HttpTransport> inner, std::string server_base)
      : inner_(std::move(inner)), server_base_(std::move(server_base)) {}
  HttpResponse send(const HttpRequest& request) override;

 private:
  std::shared_ptr<HttpTransport> inner_;
  std::string server_base_;
};

}  // namespace personaflow
