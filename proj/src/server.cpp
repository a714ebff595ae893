#include <httplib.h>

#include "personaflow/api.hpp"
#include "personaflow/errors.hpp"

namespace personaflow {

struct ApiServer::Impl {
  std::shared_ptr<Api> api;
  std::string host;
  int port = 0;
  httplib::Server server;
};

ApiServer::ApiServer(std::shared_ptr<Api> api, std::string host, int port) : impl_(std::make_unique<Impl>()) {
  impl_->api = std::move(api);
  impl_->host = std::move(host);
  impl_->port = port;
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> headers(req.headers.begin(), req.headers.end());
    const auto out = impl_->api->handle(req.method, req.target, req.body, headers);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  auto& s = impl_->server;
  s.Get(".*", handler);
  s.Post(".*", handler);
  s.Put(".*", handler);
  s.Patch(".*", handler);
  s.Delete(".*", handler);
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::run(const std::function<void(int)>& on_ready) {
  auto& s = impl_->server;
  int port = impl_->port;
  if (port == 0) {
    port = s.bind_to_any_port(impl_->host);
  } else if (!s.bind_to_port(impl_->host, port)) {
    port = -1;
  }
  if (port <= 0) {
    throw Error(ErrorCode::kIo, "cannot bind " + impl_->host + ":" + std::to_string(impl_->port));
  }
  if (on_ready) on_ready(port);
  s.listen_after_bind();
}

void ApiServer::stop() { impl_->server.stop(); }

}  // namespace personaflow
