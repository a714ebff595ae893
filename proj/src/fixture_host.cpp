#include "personaflow/fixture_host.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "personaflow/errors.hpp"
#include "personaflow/model.hpp"

namespace personaflow {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

HttpResponse json_response(int status, const Json& body) {
  HttpResponse r;
  r.status = status;
  r.headers["content-type"] = "application/json";
  r.body = dump_json(body);
  return r;
}

HttpResponse not_found() { return json_response(404, Json{{"message", "Not Found"}}); }

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

bool safe_relative(const std::string& path) {
  return !path.empty() && path.find("..") == std::string::npos && path[0] != '/';
}

}  // namespace

FixtureHost::FixtureHost(fs::path root, std::string api_base, std::string raw_base)
    : root_(std::move(root)), api_base_(std::move(api_base)), raw_base_(std::move(raw_base)) {
  while (!api_base_.empty() && api_base_.back() == '/') api_base_.pop_back();
  while (!raw_base_.empty() && raw_base_.back() == '/') raw_base_.pop_back();
}

void FixtureHost::add_fault(FixtureFault fault) {
  std::lock_guard lock(mutex_);
  faults_.push_back(std::move(fault));
}

void FixtureHost::clear_faults() {
  std::lock_guard lock(mutex_);
  faults_.clear();
}

std::vector<std::string> FixtureHost::requests() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::size_t FixtureHost::request_count() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

HttpResponse FixtureHost::handle(const HttpRequest& request) {
  {
    std::lock_guard lock(mutex_);
    log_.push_back(request.url);
    for (auto& fault : faults_) {
      if (fault.remaining == 0 || request.url.find(fault.url_contains) == std::string::npos) continue;
      if (fault.remaining > 0) --fault.remaining;
      if (fault.status == 0) throw Error(ErrorCode::kIo, "injected connection failure: " + request.url);
      HttpResponse r = json_response(fault.status, Json{{"message", "injected fault"}});
      if (fault.retry_after_seconds > 0) r.headers["retry-after"] = std::to_string(fault.retry_after_seconds);
      return r;
    }
  }
  if (request.method != "GET") return json_response(405, Json{{"message", "read-only fixture"}});
  if (starts_with(request.url, api_base_ + "/")) return handle_api(request.url.substr(api_base_.size()), request);
  if (starts_with(request.url, raw_base_ + "/")) return handle_raw(request.url.substr(raw_base_.size()));
  return handle_page(request.url);
}

HttpResponse FixtureHost::handle_api(const std::string& path_and_query, const HttpRequest& request) {
  const auto qpos = path_and_query.find('?');
  const std::string path = path_and_query.substr(0, qpos);
  const auto query =
      qpos == std::string::npos ? std::map<std::string, std::string>{} : parse_query(path_and_query.substr(qpos + 1));
  const auto parts = split(path, '/');  // "", "repos", owner, name, ...
  if (parts.size() < 4 || parts[1] != "repos") return not_found();
  const fs::path repo_dir = root_ / "repos" / parts[2] / parts[3];
  if (!safe_relative(parts[2]) || !safe_relative(parts[3]) || !fs::exists(repo_dir / "repo.json")) {
    return not_found();
  }

  if (parts.size() == 4) {
    const auto body = read_file(repo_dir / "repo.json");
    if (!body) return not_found();
    HttpResponse r;
    r.status = 200;
    r.headers["content-type"] = "application/json";
    r.body = *body;
    return r;
  }

  if (parts.size() == 5 && parts[4] == "readme") {
    for (const auto& entry : fs::directory_iterator(repo_dir)) {
      const auto name = entry.path().filename().string();
      if (entry.is_regular_file() && starts_with(name, "README")) {
        HttpResponse r;
        r.status = 200;
        r.headers["content-type"] = "application/vnd.github.raw";
        r.body = read_file(entry.path()).value_or("");
        (void)request;
        return r;
      }
    }
    return not_found();
  }

  if (parts[4] != "issues" || parts.size() > 6) return not_found();
  const auto text = read_file(repo_dir / "issues.json");
  Json issues = text ? Json::parse(*text) : Json::array();

  if (parts.size() == 6) {
    for (const auto& issue : issues) {
      if (std::to_string(issue.at("number").get<std::int64_t>()) == parts[5]) return json_response(200, issue);
    }
    return not_found();
  }

  auto q = [&](const char* key, std::string fallback) {
    auto it = query.find(key);
    return it == query.end() ? fallback : it->second;
  };
  const std::string state = q("state", "open");
  const std::string sort = q("sort", "created");
  const std::string direction = q("direction", "desc");
  const auto labels = q("labels", "");
  const auto since = parse_timestamp(q("since", ""));
  int per_page = 30, page = 1;
  try {
    per_page = std::clamp(std::stoi(q("per_page", "30")), 1, 100);
    page = std::max(1, std::stoi(q("page", "1")));
  } catch (const std::exception&) {
    return json_response(422, Json{{"message", "bad paging"}});
  }

  std::vector<Json> selected;
  for (const auto& issue : issues) {
    const auto issue_state = issue.value("state", "open");
    if (state != "all" && issue_state != state) continue;
    if (!labels.empty()) {
      bool all = true;
      for (const auto& want : split(labels, ',')) {
        bool found = false;
        for (const auto& l : issue.value("labels", Json::array())) {
          if ((l.is_string() ? l.get<std::string>() : l.value("name", "")) == want) found = true;
        }
        all = all && found;
      }
      if (!all) continue;
    }
    if (since) {
      const auto updated = parse_timestamp(issue.value("updated_at", ""));
      if (!updated || *updated < *since) continue;
    }
    selected.push_back(issue);
  }
  const std::string key = sort == "updated" ? "updated_at" : "created_at";
  std::stable_sort(selected.begin(), selected.end(), [&](const Json& a, const Json& b) {
    const auto ta = parse_timestamp(a.value(key, "")).value_or(Timestamp{});
    const auto tb = parse_timestamp(b.value(key, "")).value_or(Timestamp{});
    return direction == "asc" ? ta < tb : tb < ta;
  });
  Json out = Json::array();
  const std::size_t begin = static_cast<std::size_t>(page - 1) * static_cast<std::size_t>(per_page);
  for (std::size_t i = begin; i < selected.size() && i < begin + static_cast<std::size_t>(per_page); ++i) {
    out.push_back(selected[i]);
  }
  return json_response(200, out);
}

HttpResponse FixtureHost::handle_raw(const std::string& path) {
  // /<owner>/<name>/<branch>/<path...>
  const auto parts = split(path, '/');
  if (parts.size() < 5) return not_found();
  std::string rel;
  for (std::size_t i = 4; i < parts.size(); ++i) rel += (i > 4 ? "/" : "") + url_decode(parts[i]);
  if (!safe_relative(parts[1]) || !safe_relative(parts[2]) || !safe_relative(rel)) return not_found();
  const auto body = read_file(root_ / "repos" / parts[1] / parts[2] / "contents" / rel);
  if (!body) return not_found();
  HttpResponse r;
  r.status = 200;
  r.headers["content-type"] = "text/plain; charset=utf-8";
  r.body = *body;
  return r;
}

HttpResponse FixtureHost::handle_page(const std::string& url) {
  const auto index_text = read_file(root_ / "pages" / "index.json");
  if (!index_text) return not_found();
  const auto index = Json::parse(*index_text);
  auto lookup = [&](const std::string& key) -> std::optional<std::string> {
    if (index.contains(key)) return index.at(key).get<std::string>();
    return std::nullopt;
  };
  auto file = lookup(url);
  if (!file && !url.empty() && url.back() == '/') file = lookup(url.substr(0, url.size() - 1));
  if (!file) file = lookup(url + "/");
  if (!file || !safe_relative(*file)) return not_found();
  const auto body = read_file(root_ / "pages" / *file);
  if (!body) return not_found();
  HttpResponse r;
  r.status = 200;
  r.headers["content-type"] = "text/html; charset=utf-8";
  r.body = *body;
  return r;
}

// ---------------------------------------------------------------------------

struct FixtureServer::Impl {
  std::shared_ptr<FixtureHost> host;
  httplib::Server server;
  std::thread thread;
};

FixtureServer::FixtureServer(std::shared_ptr<FixtureHost> host) : impl_(std::make_unique<Impl>()) {
  impl_->host = std::move(host);
  auto* host_ptr = impl_->host.get();
  auto reply = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    for (const auto& [k, v] : r.headers) {
      if (k != "content-type") res.set_header(k, v);
    }
    res.set_content(r.body, r.header("content-type").empty() ? "text/plain" : r.header("content-type"));
  };
  impl_->server.Get(R"(/api/(.*))", [host_ptr, reply](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r;
    r.url = host_ptr->api_base() + "/" + req.matches[1].str();
    if (!req.params.empty()) {
      std::string q;
      for (const auto& [k, v] : req.params) q += (q.empty() ? "?" : "&") + url_encode(k) + "=" + url_encode(v);
      r.url += q;
    }
    reply(res, host_ptr->handle(r));
  });
  impl_->server.Get(R"(/raw/(.*))", [host_ptr, reply](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r;
    r.url = host_ptr->raw_base() + "/" + req.matches[1].str();
    reply(res, host_ptr->handle(r));
  });
  impl_->server.Get("/ext", [host_ptr, reply](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r;
    r.url = req.get_param_value("url");
    reply(res, host_ptr->handle(r));
  });
  port_ = impl_->server.bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw Error(ErrorCode::kIo, "fixture server could not bind a loopback port");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

FixtureServer::~FixtureServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

HttpResponse ExternalProxyTransport::send(const HttpRequest& request) {
  if (starts_with(request.url, server_base_)) return inner_->send(request);
  HttpRequest rewritten = request;
  rewritten.url = server_base_ + "/ext?url=" + url_encode(request.url);
  return inner_->send(rewritten);
}

}  // namespace personaflow
