#include "personaflow/personaflow.h"

#include <cstring>
#include <mutex>

#include "personaflow/api.hpp"
#include "personaflow/errors.hpp"
#include "personaflow/http.hpp"
#include "personaflow/rubric.hpp"

using namespace personaflow;

struct pf_engine {
  std::shared_ptr<Api> api;
  std::mutex server_mutex;
  ApiServer* server = nullptr;
};

namespace {

thread_local std::string last_error;

char* copy_out(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int fail(ErrorCode code, const std::string& message) {
  last_error = message;
  return static_cast<int>(code) + 1;
}

template <typename F>
int guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return PF_OK;
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const Json::exception& e) {
    return fail(ErrorCode::kInvalidArgument, e.what());
  } catch (const std::exception& e) {
    return fail(ErrorCode::kInternal, e.what());
  }
}

}  // namespace

extern "C" {

const char* pf_version(void) { return "1.0.0"; }

const char* pf_last_error(void) { return last_error.c_str(); }

void pf_string_free(char* s) { std::free(s); }

int pf_engine_open(const char* config_json, pf_engine** out) {
  if (!out) return fail(ErrorCode::kInvalidArgument, "out handle is null");
  *out = nullptr;
  return guarded([&] {
    Json config = Json::object();
    if (config_json && *config_json) config = Json::parse(config_json);
    auto engine = std::make_shared<Engine>(engine_config_from_json(config));
    auto handle = std::make_unique<pf_engine>();
    handle->api = std::make_shared<Api>(std::move(engine));
    *out = handle.release();
  });
}

void pf_engine_close(pf_engine* engine) {
  if (!engine) return;
  pf_stop_serving(engine);
  delete engine;
}

int pf_engine_request(pf_engine* engine, const char* method, const char* target, const char* body, int* http_status,
                      char** response_json) {
  if (!engine || !method || !target || !response_json) return fail(ErrorCode::kInvalidArgument, "null argument");
  return guarded([&] {
    const auto r = engine->api->handle(method, target, body ? body : "");
    if (http_status) *http_status = r.status;
    *response_json = copy_out(r.body.dump());
  });
}

int pf_engine_wait_job(pf_engine* engine, const char* job_id, int64_t timeout_ms, char** snapshot_json) {
  if (!engine || !job_id || !snapshot_json) return fail(ErrorCode::kInvalidArgument, "null argument");
  return guarded([&] {
    engine->api->engine().jobs().wait(job_id, std::chrono::milliseconds(timeout_ms));
    const auto r = engine->api->handle("GET", std::string("/jobs/") + url_encode(job_id), "");
    if (r.status != 200) {
      const auto& err = r.body.at("error");
      auto code = parse_error_code(err.at("code").get<std::string>());
      throw Error(code.value_or(ErrorCode::kInternal), err.at("message").get<std::string>());
    }
    *snapshot_json = copy_out(r.body.dump());
  });
}

int pf_serve(pf_engine* engine, const char* host, int port, pf_ready_fn on_ready, void* user) {
  if (!engine) return fail(ErrorCode::kInvalidArgument, "null engine");
  return guarded([&] {
    ApiServer server(engine->api, host ? host : "127.0.0.1", port);
    {
      std::lock_guard lock(engine->server_mutex);
      engine->server = &server;
    }
    try {
      server.run([&](int bound) {
        if (on_ready) on_ready(bound, user);
      });
    } catch (...) {
      std::lock_guard lock(engine->server_mutex);
      engine->server = nullptr;
      throw;
    }
    std::lock_guard lock(engine->server_mutex);
    engine->server = nullptr;
  });
}

void pf_stop_serving(pf_engine* engine) {
  if (!engine) return;
  std::lock_guard lock(engine->server_mutex);
  if (engine->server) engine->server->stop();
}

const char* pf_band_of(double confidence) {
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    last_error = "confidence must be within [0,1]";
    return nullptr;
  }
  return to_string(band_of(confidence)).data();
}

int pf_rubric_score(uint32_t flags, int* points) {
  if (!points) return fail(ErrorCode::kInvalidArgument, "null argument");
  if (flags >> kEvidenceCount) return fail(ErrorCode::kInvalidArgument, "unknown evidence bits");
  return guarded([&] { *points = rubric_score(EvidenceFlags(flags)).points; });
}

uint64_t pf_network_request_count(void) { return network_request_count(); }

}  // extern "C"
