/* PersonaFlow C API.
 *
 * Every call returns PF_OK or one of the PF_E_* codes; the message of the last
 * failure on the calling thread is available from pf_last_error(). Strings
 * handed out by the library are released with pf_string_free(). */
#ifndef PERSONAFLOW_H
#define PERSONAFLOW_H

#include <stdint.h>

#if defined(_WIN32)
#define PF_API __declspec(dllexport)
#else
#define PF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct pf_engine pf_engine;

typedef enum pf_status {
  PF_OK = 0,
  PF_E_INVALID_ARGUMENT,
  PF_E_MALFORMED_URL,
  PF_E_NOT_FOUND,
  PF_E_RATE_LIMITED,
  PF_E_NO_README,
  PF_E_EMPTY_CORPUS,
  PF_E_PROVIDER_ERROR,
  PF_E_PARSE_ERROR,
  PF_E_MISSING_PLACEHOLDER,
  PF_E_UNKNOWN_PERSONA,
  PF_E_FEWER_THAN_TWO,
  PF_E_INVALID_PATCH,
  PF_E_INVALID_PERSONA,
  PF_E_CONFLICTING_REQUEST,
  PF_E_INVALID_PARAMS,
  PF_E_BUSY_REPOSITORY,
  PF_E_UNKNOWN_JOB,
  PF_E_UNKNOWN_REPOSITORY,
  PF_E_STALE_VERSION,
  PF_E_IO,
  PF_E_INTERNAL
} pf_status;

PF_API const char* pf_version(void);
PF_API const char* pf_last_error(void);
PF_API void pf_string_free(char* s);

/* config_json: see engine_config_from_json ("db", "host", "provider", "images",
 * "workers", "prices"). NULL or "" gives an in-memory offline engine. */
PF_API int pf_engine_open(const char* config_json, pf_engine** out);
PF_API void pf_engine_close(pf_engine* engine);

/* Routes one API request in-process. `target` is path plus query string, `body`
 * may be NULL. A non-2xx HTTP status is not a call failure: the error object is
 * in *response_json. */
PF_API int pf_engine_request(pf_engine* engine, const char* method, const char* target, const char* body,
                             int* http_status, char** response_json);

/* Blocks until the job is terminal or timeout_ms passes; *snapshot_json is the
 * job view at that moment. */
PF_API int pf_engine_wait_job(pf_engine* engine, const char* job_id, int64_t timeout_ms, char** snapshot_json);

/* Serves the API over HTTP until pf_stop_serving(). port 0 picks a free port,
 * reported through on_ready before the first request is accepted. */
typedef void (*pf_ready_fn)(int port, void* user);
PF_API int pf_serve(pf_engine* engine, const char* host, int port, pf_ready_fn on_ready, void* user);
PF_API void pf_stop_serving(pf_engine* engine);

/* "high", "medium", "low" or "unmatched"; NULL outside [0,1]. */
PF_API const char* pf_band_of(double confidence);
/* Bit i of flags is evidence component i; *points is the clamped score. */
PF_API int pf_rubric_score(uint32_t flags, int* points);
/* Outbound network requests made by this process so far. */
PF_API uint64_t pf_network_request_count(void);

#ifdef __cplusplus
}
#endif

#endif
