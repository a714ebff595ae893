// personaflow command line. Talks to the engine through the C API (--local) or
// to a running server over HTTP (--api).
#include <CLI11.hpp>
#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "personaflow/personaflow.h"

using Json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRemote = 3;
constexpr int kExitProvider = 4;

struct Reply {
  int status = 0;
  Json body;
};

/// Thrown to leave with a specific exit code after printing `message`.
struct Exit {
  int code;
  std::string message;
};

int exit_code_for_status(int status) {
  if (status == 400) return kExitValidation;
  if (status == 502) return kExitProvider;
  return kExitRemote;
}

/// Job errors look like "<ErrorCode>: message".
int exit_code_for_job_error(const std::string& error) {
  const auto code = error.substr(0, error.find(':'));
  if (code == "ProviderError" || code == "ParseError") return kExitProvider;
  if (code == "InvalidParams" || code == "InvalidArgument" || code == "MalformedUrl") return kExitValidation;
  return kExitRemote;
}

class Backend {
 public:
  virtual ~Backend() = default;
  virtual Reply request(const std::string& method, const std::string& target, const Json& body) = 0;
  virtual Json wait(const std::string& job_id) = 0;

  /// 2xx body or Exit carrying the error.
  Json call(const std::string& method, const std::string& target, const Json& body = nullptr) {
    auto r = request(method, target, body);
    if (r.status >= 200 && r.status < 300) return r.body;
    std::string message = "HTTP " + std::to_string(r.status);
    if (r.body.is_object() && r.body.contains("error")) {
      message = r.body["error"].value("code", "") + ": " + r.body["error"].value("message", "");
    }
    throw Exit{exit_code_for_status(r.status), message};
  }
};

class LocalBackend final : public Backend {
 public:
  explicit LocalBackend(const Json& config) {
    if (pf_engine_open(config.dump().c_str(), &engine_) != PF_OK) {
      throw Exit{kExitValidation, std::string("cannot open engine: ") + pf_last_error()};
    }
  }
  ~LocalBackend() override { pf_engine_close(engine_); }

  Reply request(const std::string& method, const std::string& target, const Json& body) override {
    int status = 0;
    char* out = nullptr;
    const auto text = body.is_null() ? std::string() : body.dump();
    if (pf_engine_request(engine_, method.c_str(), target.c_str(), text.c_str(), &status, &out) != PF_OK) {
      throw Exit{kExitRemote, pf_last_error()};
    }
    Reply r{status, Json::parse(out)};
    pf_string_free(out);
    return r;
  }

  Json wait(const std::string& job_id) override {
    char* out = nullptr;
    if (pf_engine_wait_job(engine_, job_id.c_str(), 30LL * 60 * 1000, &out) != PF_OK) {
      throw Exit{kExitRemote, pf_last_error()};
    }
    auto j = Json::parse(out);
    pf_string_free(out);
    return j;
  }

  pf_engine* handle() { return engine_; }

 private:
  pf_engine* engine_ = nullptr;
};

class RemoteBackend final : public Backend {
 public:
  RemoteBackend(const std::string& base, std::chrono::milliseconds poll) : client_(base), poll_(poll) {
    client_.set_read_timeout(std::chrono::seconds(60));
  }

  Reply request(const std::string& method, const std::string& target, const Json& body) override {
    const auto text = body.is_null() ? std::string() : body.dump();
    httplib::Result res;
    if (method == "GET") {
      res = client_.Get(target);
    } else if (method == "POST") {
      res = client_.Post(target, text, "application/json");
    } else if (method == "PUT") {
      res = client_.Put(target, text, "application/json");
    } else if (method == "DELETE") {
      res = client_.Delete(target);
    }
    if (!res) throw Exit{kExitRemote, "request failed: " + httplib::to_string(res.error())};
    Reply r{res->status, Json::parse(res->body, nullptr, false)};
    return r;
  }

  Json wait(const std::string& job_id) override {
    for (;;) {
      auto j = call("GET", "/jobs/" + job_id);
      const auto stage = j.value("stage", "");
      if (stage == "done" || stage == "failed") return j;
      std::this_thread::sleep_for(poll_);
    }
  }

 private:
  httplib::Client client_;
  std::chrono::milliseconds poll_;
};

std::string encode(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == ':') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

/// Accepts "owner:name", "owner/name" or a repository URL.
std::string repo_id(std::string text) {
  for (const char* prefix : {"https://", "http://"}) {
    if (text.rfind(prefix, 0) == 0) {
      text = text.substr(std::strlen(prefix));
      text = text.substr(text.find('/') + 1);
    }
  }
  if (auto pos = text.find('/'); pos != std::string::npos) {
    auto rest = text.substr(pos + 1);
    text = text.substr(0, pos) + ":" + rest.substr(0, rest.find('/'));
  }
  if (text.size() > 4 && text.compare(text.size() - 4, 4, ".git") == 0) text.resize(text.size() - 4);
  return text;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() > width) s = s.substr(0, width - 1) + "~";
  return s + std::string(width - s.size() + 1, ' ');
}

int percent(double v) { return static_cast<int>(v * 100.0 + 0.5); }

void print_personas(const Json& personas) {
  std::cout << pad("ID", 6) << pad("NAME", 22) << pad("AGE", 4) << pad("OCCUPATION", 30) << pad("LEVEL", 13)
            << pad("CONF", 5) << "PROVENANCE\n";
  for (const auto& p : personas) {
    std::cout << pad(p.value("id", ""), 6) << pad(p.value("name", ""), 22)
              << pad(std::to_string(p.value("age", 0)), 4) << pad(p.value("occupation", ""), 30)
              << pad(p.value("experience_level", ""), 13)
              << pad(std::to_string(percent(p.value("confidence_score", 0.0))) + "%", 5)
              << p.value("provenance", "") << (p.value("archived", false) ? " (archived)" : "") << "\n";
  }
}

void print_list(std::ostream& out, const char* heading, const Json& items) {
  out << "### " << heading << "\n\n";
  for (const auto& i : items) out << "- " << i.get<std::string>() << "\n";
  out << "\n";
}

std::string persona_markdown(const Json& p) {
  std::ostringstream out;
  out << "## " << p.value("name", "") << "\n\n";
  if (p.contains("avatar")) out << "![" << p.value("name", "") << "](" << p["avatar"].value("locator", "") << ")\n\n";
  out << "**Age:** " << p.value("age", 0) << "  \n"
      << "**Occupation:** " << p.value("occupation", "") << "  \n"
      << "**Location:** " << p.value("location", "") << "  \n"
      << "**Experience:** " << p.value("experience_level", "") << "  \n"
      << "**Provenance:** " << p.value("provenance", "") << "\n\n";
  if (!p.value("quote", "").empty()) out << "> " << p.value("quote", "") << "\n\n";
  out << "### Background\n\n" << p.value("background", "") << "\n\n";
  print_list(out, "Goals and motivations", p.value("goals", Json::array()));
  print_list(out, "Pain points and frustrations", p.value("pain_points", Json::array()));
  return out.str();
}

void print_issues(const Json& view) {
  if (view.value("view", "") == "persona") {
    for (const auto& g : view["groups"]) {
      std::cout << g["persona"].value("name", "") << " (" << g["persona"].value("id", "") << "): " << g.value("count", 0)
                << " issues\n";
      for (const auto& i : g["issues"]) {
        std::cout << "  #" << i.value("number", 0) << " " << i.value("percent", 0) << "% [" << i.value("origin", "")
                  << "] " << i.value("title", "") << "\n";
      }
    }
    std::cout << "Unassigned: " << view["unassigned"].size() << " issues\n";
    return;
  }
  for (const auto& i : view["issues"]) {
    std::cout << "#" << i.value("number", 0) << " [" << i.value("confidence_band", "") << " "
              << i.value("confidence_percent", 0) << "%] " << i.value("title", "");
    std::string sep = "  <- ";
    for (const auto& b : i["personas"]) {
      std::cout << sep << b.value("persona_name", "") << " " << b.value("percent", 0) << "%"
                << (b.value("origin", "") == "manual" ? " (manual)" : "");
      sep = ", ";
    }
    std::cout << "\n";
  }
}

void print_analytics(const Json& a) {
  std::cout << "Total issues:    " << a.value("total_issues", 0) << "\n"
            << "Mapped issues:   " << a.value("mapped_issues", 0) << "\n"
            << "Unmapped issues: " << a.value("unmapped_issues", 0) << "\n"
            << "Active personas: " << a.value("active_personas", 0) << "\n"
            << "Coverage rate:   " << percent(a.value("coverage_rate", 0.0)) << "%\n"
            << "Stars:           " << a.value("repo_stars", 0) << "\n\nLabels\n";
  for (const auto& [label, n] : a["label_distribution"].items()) std::cout << "  " << pad(label, 24) << n << "\n";
  std::cout << "\nPersona coverage\n";
  for (const auto& [id, n] : a["persona_coverage"].items()) std::cout << "  " << pad(id, 24) << n << "\n";
}

/// Waits for a job and turns a failure into an Exit.
Json finish(Backend& backend, const std::string& job_id) {
  auto j = backend.wait(job_id);
  if (j.value("stage", "") == "failed") {
    const auto error = j["error"].is_string() ? j["error"].get<std::string>() : std::string("job failed");
    throw Exit{exit_code_for_job_error(error), "job " + job_id + " failed: " + error};
  }
  for (const auto& w : j.value("warnings", Json::array())) std::cerr << "warning: " << w.get<std::string>() << "\n";
  return j;
}

Json read_json_arg(const std::string& text) {
  std::string content = text;
  if (!text.empty() && text[0] == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw Exit{kExitValidation, "cannot read " + text.substr(1)};
    content.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto j = Json::parse(content, nullptr, false);
  if (j.is_discarded()) throw Exit{kExitValidation, "not valid JSON: " + text};
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"personaflow: personas and issue mapping for a code repository"};
  app.require_subcommand(1);

  std::string api_url;
  bool local = false;
  bool json_out = false;
  std::string db = "personaflow.db";
  std::string config_file;
  std::string host_fixtures;
  std::string provider_fixtures;
  std::string images = "none";
  int poll_ms = 1000;
  auto* api_opt = app.add_option("--api", api_url, "Base URL of a running personaflow server");
  app.add_flag("--local", local, "Run an embedded engine (default)")->excludes(api_opt);
  app.add_flag("--json", json_out, "Machine-readable output");
  app.add_option("--db", db, "Database file for --local")->capture_default_str();
  app.add_option("--config", config_file, "Engine configuration JSON file for --local");
  app.add_option("--host-fixtures", host_fixtures, "Serve repository data from a fixture directory");
  app.add_option("--provider-fixtures", provider_fixtures, "Answer prompts from recorded completions");
  app.add_option("--images", images, "Image provider: none or mock")->check(CLI::IsMember({"none", "mock"}));
  app.add_option("--poll-ms", poll_ms, "Status polling interval for --api")->capture_default_str();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Generate personas for a repository");
  std::string url;
  int persona_count = 4;
  std::vector<std::string> doc_urls;
  std::string context;
  bool wait = false;
  bool save = false;
  analyze->add_option("url", url, "Repository URL")->required();
  analyze->add_option("--personas,-n", persona_count, "Number of personas (1-10)")->capture_default_str();
  analyze->add_option("--doc-url", doc_urls, "Extra documentation URL (repeatable)");
  analyze->add_option("--context", context, "Additional context about the audience");
  analyze->add_flag("--wait", wait, "Wait for completion and print the personas");
  analyze->add_flag("--save", save, "After generation, sync and map open issues");

  // personas
  auto* personas = app.add_subcommand("personas", "Inspect and refine personas");
  personas->require_subcommand(1);
  std::string repo_arg, persona_id, patch_arg, guidance, format = "markdown";
  std::vector<std::string> merge_ids, sets;
  bool include_archived = false;
  int count = 0;
  auto* p_list = personas->add_subcommand("list", "List personas of a repository");
  p_list->add_option("repo", repo_arg)->required();
  p_list->add_flag("--include-archived", include_archived);
  auto* p_show = personas->add_subcommand("show", "Show one persona");
  p_show->add_option("id", persona_id)->required();
  auto* p_edit = personas->add_subcommand("edit", "Edit persona fields");
  p_edit->add_option("id", persona_id)->required();
  p_edit->add_option("--patch", patch_arg, "JSON object or @file");
  p_edit->add_option("--set", sets, "field=value (repeatable; values are JSON when they parse)");
  auto* p_merge = personas->add_subcommand("merge", "Merge two or more personas");
  p_merge->add_option("ids", merge_ids)->required()->expected(2, -1);
  p_merge->add_option("--guidance", guidance);
  auto* p_delete = personas->add_subcommand("delete", "Archive a persona");
  p_delete->add_option("id", persona_id)->required();
  auto* p_export = personas->add_subcommand("export", "Export personas");
  p_export->add_option("repo", repo_arg)->required();
  p_export->add_option("--format", format)->check(CLI::IsMember({"json", "markdown"}))->capture_default_str();
  auto* p_create = personas->add_subcommand("create", "Add a custom persona");
  p_create->add_option("repo", repo_arg)->required();
  p_create->add_option("fields", patch_arg, "JSON object or @file")->required();
  auto* p_generate = personas->add_subcommand("generate", "Generate additional personas");
  p_generate->add_option("repo", repo_arg)->required();
  p_generate->add_option("--count", count)->required();
  auto* p_regen = personas->add_subcommand("regenerate", "Replace unedited AI personas");
  p_regen->add_option("repo", repo_arg)->required();
  p_regen->add_option("--count", count);

  // issues
  auto* issues = app.add_subcommand("issues", "Sync, map and browse issues");
  issues->require_subcommand(1);
  std::string mode = "all-new", since, until, state, view = "github", band, persona_filter;
  std::vector<std::int64_t> ids;
  std::vector<std::string> labels, add, remove;
  std::int64_t limit = 20, number = 0;
  bool force = false;
  auto* i_sync = issues->add_subcommand("sync", "Pull issues and map them");
  i_sync->add_option("repo", repo_arg)->required();
  i_sync->add_option("--mode", mode)->check(CLI::IsMember({"all-new", "ids", "labels", "date-range"}))->capture_default_str();
  i_sync->add_option("--ids", ids);
  i_sync->add_option("--labels", labels);
  i_sync->add_option("--since", since, "RFC 3339");
  i_sync->add_option("--until", until, "RFC 3339");
  i_sync->add_option("--limit", limit)->capture_default_str();
  i_sync->add_option("--state", state)->check(CLI::IsMember({"open", "closed"}));
  i_sync->add_flag("--force-remap-ai", force);
  auto* i_list = issues->add_subcommand("list", "List issues with persona badges");
  i_list->add_option("repo", repo_arg)->required();
  i_list->add_option("--view", view)->check(CLI::IsMember({"github", "persona"}))->capture_default_str();
  i_list->add_option("--band", band)->check(CLI::IsMember({"high", "medium", "low", "unmatched"}));
  i_list->add_option("--state", state)->check(CLI::IsMember({"open", "closed", "all"}));
  i_list->add_option("--persona", persona_filter);
  auto* i_show = issues->add_subcommand("show", "Show one issue with its mapping");
  i_show->add_option("repo", repo_arg)->required();
  i_show->add_option("number", number)->required();
  auto* i_map = issues->add_subcommand("map", "Map synced issues to personas");
  i_map->add_option("repo", repo_arg)->required();
  i_map->add_flag("--force-remap-ai", force);
  auto* i_assoc = issues->add_subcommand("associate", "Add or remove persona associations");
  i_assoc->add_option("repo", repo_arg)->required();
  i_assoc->add_option("number", number)->required();
  i_assoc->add_option("--add", add);
  i_assoc->add_option("--remove", remove);

  auto* analytics = app.add_subcommand("analytics", "Coverage and distribution summary");
  analytics->add_option("repo", repo_arg)->required();

  auto* jobs = app.add_subcommand("job", "Show a job");
  std::string job_id;
  jobs->add_option("id", job_id)->required();

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  std::string bind_host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", bind_host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (analyze->parsed() && (persona_count < 1 || persona_count > 10)) {
      throw Exit{kExitValidation, "--personas must be between 1 and 10"};
    }
    std::unique_ptr<Backend> backend;
    LocalBackend* local_backend = nullptr;
    const bool remote = !api_url.empty();
    if (remote) {
      if (serve->parsed()) throw Exit{kExitValidation, "serve runs an embedded engine; drop --api"};
      backend = std::make_unique<RemoteBackend>(api_url, std::chrono::milliseconds(poll_ms));
    } else {
      Json config = Json::object();
      if (!config_file.empty()) config = read_json_arg("@" + config_file);
      config["db"] = db;
      if (!host_fixtures.empty()) config["host"] = {{"kind", "fixture"}, {"root", host_fixtures}};
      if (!provider_fixtures.empty()) config["provider"] = {{"kind", "mock"}, {"fixtures", provider_fixtures}};
      if (!config.contains("images") || images != "none") config["images"] = images;
      auto lb = std::make_unique<LocalBackend>(config);
      local_backend = lb.get();
      backend = std::move(lb);
    }
    Backend& b = *backend;
    const auto rid = repo_arg.empty() ? std::string() : encode(repo_id(repo_arg));

    if (analyze->parsed()) {
      Json body{{"url", url}, {"persona_count", persona_count}, {"external_urls", doc_urls},
                {"additional_context", context}};
      const auto submitted = b.call("POST", "/repos", body);
      const auto id = submitted["job_id"].get<std::string>();
      const auto repo = encode(submitted["repo_id"].get<std::string>());
      if (!wait && remote) {
        std::cout << submitted.dump(2) << "\n";
        return kExitOk;
      }
      finish(b, id);
      if (save) finish(b, b.call("POST", "/repos/" + repo + "/save")["job_id"].get<std::string>());
      const auto list = b.call("GET", "/repos/" + repo + "/personas");
      if (json_out) {
        std::cout << list.dump(2) << "\n";
      } else {
        print_personas(list);
      }
    } else if (p_list->parsed()) {
      const auto list =
          b.call("GET", "/repos/" + rid + "/personas" + (include_archived ? "?include_archived=true" : ""));
      json_out ? void(std::cout << list.dump(2) << "\n") : print_personas(list);
    } else if (p_show->parsed()) {
      const auto p = b.call("GET", "/personas/" + encode(persona_id));
      std::cout << (json_out ? p.dump(2) + "\n" : persona_markdown(p));
    } else if (p_edit->parsed()) {
      Json patch = patch_arg.empty() ? Json::object() : read_json_arg(patch_arg);
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw Exit{kExitValidation, "--set expects field=value"};
        const auto value = s.substr(eq + 1);
        auto parsed = Json::parse(value, nullptr, false);
        patch[s.substr(0, eq)] = parsed.is_discarded() ? Json(value) : parsed;
      }
      if (patch.empty()) throw Exit{kExitValidation, "nothing to change: use --patch or --set"};
      const auto p = b.call("PUT", "/personas/" + encode(persona_id), patch);
      std::cout << (json_out ? p.dump(2) + "\n" : persona_markdown(p));
    } else if (p_merge->parsed()) {
      Json body{{"ids", merge_ids}};
      if (!guidance.empty()) body["guidance"] = guidance;
      const auto p = b.call("POST", "/personas/merge", body);
      std::cout << (json_out ? p.dump(2) + "\n" : persona_markdown(p));
    } else if (p_delete->parsed()) {
      const auto p = b.call("DELETE", "/personas/" + encode(persona_id));
      std::cout << (json_out ? p.dump(2) + "\n" : "archived " + p.value("id", "") + "\n");
    } else if (p_export->parsed()) {
      const auto list = b.call("GET", "/repos/" + rid + "/personas");
      if (format == "json") {
        std::cout << list.dump(2) << "\n";
      } else {
        for (const auto& p : list) std::cout << persona_markdown(p);
      }
    } else if (p_create->parsed()) {
      const auto p = b.call("POST", "/repos/" + rid + "/personas", read_json_arg(patch_arg));
      std::cout << (json_out ? p.dump(2) + "\n" : persona_markdown(p));
    } else if (p_generate->parsed() || p_regen->parsed()) {
      Json body = Json::object();
      if (count > 0) body["count"] = count;
      const auto path = p_generate->parsed() ? "/personas/generate" : "/personas/regenerate";
      finish(b, b.call("POST", "/repos/" + rid + path, body)["job_id"].get<std::string>());
      const auto list = b.call("GET", "/repos/" + rid + "/personas");
      json_out ? void(std::cout << list.dump(2) << "\n") : print_personas(list);
    } else if (i_sync->parsed()) {
      std::string wire_mode = mode;
      std::replace(wire_mode.begin(), wire_mode.end(), '-', '_');
      Json body{{"mode", wire_mode}, {"limit", limit}, {"force_remap_ai", force}};
      if (!ids.empty()) body["ids"] = ids;
      if (!labels.empty()) body["labels"] = labels;
      if (!since.empty()) body["since"] = since;
      if (!until.empty()) body["until"] = until;
      if (!state.empty()) body["state"] = state;
      const auto job = finish(b, b.call("POST", "/repos/" + rid + "/issues/sync", body)["job_id"].get<std::string>());
      std::cout << (json_out ? job.dump(2) : "sync " + job.value("job_id", "") + " done") << "\n";
    } else if (i_map->parsed()) {
      const auto job = finish(
          b, b.call("POST", "/repos/" + rid + "/issues/map", {{"force_remap_ai", force}})["job_id"].get<std::string>());
      std::cout << (json_out ? job.dump(2) : "mapping " + job.value("job_id", "") + " done") << "\n";
    } else if (i_list->parsed()) {
      std::string target = "/repos/" + rid + "/issues?view=" + view;
      if (!band.empty()) target += "&confidence_band=" + band;
      if (!state.empty()) target += "&state=" + state;
      if (!persona_filter.empty()) target += "&persona_id=" + encode(persona_filter);
      const auto v = b.call("GET", target);
      json_out ? void(std::cout << v.dump(2) << "\n") : print_issues(v);
    } else if (i_show->parsed()) {
      std::cout << b.call("GET", "/repos/" + rid + "/issues/" + std::to_string(number)).dump(2) << "\n";
    } else if (i_assoc->parsed()) {
      const auto v = b.call("PUT", "/repos/" + rid + "/issues/" + std::to_string(number) + "/associations",
                            {{"add", add}, {"remove", remove}});
      std::cout << v.dump(2) << "\n";
    } else if (analytics->parsed()) {
      const auto a = b.call("GET", "/repos/" + rid + "/analytics");
      json_out ? void(std::cout << a.dump(2) << "\n") : print_analytics(a);
    } else if (jobs->parsed()) {
      std::cout << b.call("GET", "/jobs/" + encode(job_id)).dump(2) << "\n";
    } else if (serve->parsed()) {
      const int rc = pf_serve(
          local_backend->handle(), bind_host.c_str(), port,
          [](int bound, void*) { std::cerr << "listening on port " << bound << "\n"; }, nullptr);
      if (rc != PF_OK) throw Exit{kExitRemote, pf_last_error()};
    }
    return kExitOk;
  } catch (const Exit& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRemote;
  }
}
