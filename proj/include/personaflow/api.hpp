#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "personaflow/engine.hpp"

namespace personaflow {

struct ApiResponse {
  int status = 200;
  Json body;
};

/// JSON resource router shared by the HTTP server and the C API.
/// Errors come back as {"error": {"code", "message"}} with the mapped status.
class Api {
 public:
  explicit Api(std::shared_ptr<Engine> engine) : engine_(std::move(engine)) {}

  /// `target` is path plus optional query string. Never throws.
  ApiResponse handle(std::string_view method, std::string_view target, std::string_view body,
                     const std::map<std::string, std::string>& headers = {});

  Engine& engine() { return *engine_; }

 private:
  ApiResponse dispatch(const std::string& method, const std::vector<std::string>& path,
                       const std::map<std::string, std::string>& query, const Json& body,
                       const std::map<std::string, std::string>& headers);

  std::shared_ptr<Engine> engine_;
};

/// Wire views used by the routes; exposed for tests.
Json persona_view(const Versioned<Persona>& p);
Json issue_list_view(const RepoSnapshot& snap, std::string_view view, const std::map<std::string, std::string>& filters);
Json issue_detail_view(const RepoSnapshot& snap, std::int64_t number, std::int64_t mapping_version);
Json error_body(ErrorCode code, std::string_view message);

/// Blocking HTTP front end for an Api. `on_ready` receives the bound port.
class ApiServer {
 public:
  ApiServer(std::shared_ptr<Api> api, std::string host, int port);
  ~ApiServer();
  /// Serves until stop(). Throws kIo when the address cannot be bound.
  void run(const std::function<void(int)>& on_ready = {});
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace personaflow
