/* Exercises the shared library through the C header only. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "personaflow/personaflow.h"

static int failures = 0;

#define EXPECT(cond)                                                \
  do {                                                              \
    if (!(cond)) {                                                  \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                   \
    }                                                               \
  } while (0)

static char* find_value(const char* json, const char* key) {
  /* Naive "key":"value" lookup; enough for job ids. */
  char pattern[64];
  const char* at;
  const char* end;
  char* out;
  snprintf(pattern, sizeof pattern, "\"%s\":\"", key);
  at = strstr(json, pattern);
  if (!at) return NULL;
  at += strlen(pattern);
  end = strchr(at, '"');
  out = malloc((size_t)(end - at) + 1);
  memcpy(out, at, (size_t)(end - at));
  out[end - at] = '\0';
  return out;
}

int main(void) {
  pf_engine* engine = NULL;
  char config[2048];
  char* response = NULL;
  char* job = NULL;
  char target[128];
  int status = 0;
  int points = -1;

  EXPECT(strlen(pf_version()) > 0);
  EXPECT(strcmp(pf_band_of(0.9), "high") == 0);
  EXPECT(strcmp(pf_band_of(0.75), "medium") == 0);
  EXPECT(strcmp(pf_band_of(0.4), "low") == 0);
  EXPECT(pf_band_of(1.5) == NULL);

  EXPECT(pf_rubric_score(0x107u, &points) == PF_OK); /* goal, pain point, workflow, technical mismatch */
  EXPECT(points == 25);
  EXPECT(pf_rubric_score(1u << 10, &points) == PF_E_INVALID_ARGUMENT);
  EXPECT(strlen(pf_last_error()) > 0);

  EXPECT(pf_engine_open("{not json", &engine) != PF_OK);
  EXPECT(engine == NULL);

  snprintf(config, sizeof config,
           "{\"host\":{\"kind\":\"fixture\",\"root\":\"%s/host\"},"
           "\"provider\":{\"kind\":\"mock\",\"fixtures\":\"%s/mock\"},\"resume_jobs\":false}",
           PF_FIXTURES_DIR, PF_FIXTURES_DIR);
  EXPECT(pf_engine_open(config, &engine) == PF_OK);
  if (!engine) return 1;

  EXPECT(pf_engine_request(engine, "POST", "/repos", "{\"url\":\"https://github.com/SheetAble/SheetAble\"}", &status,
                           &response) == PF_OK);
  EXPECT(status == 202);
  job = find_value(response, "job_id");
  pf_string_free(response);
  EXPECT(job != NULL);
  if (job) {
    EXPECT(pf_engine_wait_job(engine, job, 30000, &response) == PF_OK);
    EXPECT(strstr(response, "\"stage\":\"done\"") != NULL);
    pf_string_free(response);
    free(job);
  }

  EXPECT(pf_engine_request(engine, "GET", "/repos/SheetAble:SheetAble/personas", NULL, &status, &response) == PF_OK);
  EXPECT(status == 200);
  EXPECT(strstr(response, "Akira Nakamura") != NULL);
  pf_string_free(response);

  EXPECT(pf_engine_request(engine, "GET", "/personas/p77", NULL, &status, &response) == PF_OK);
  EXPECT(status == 404);
  EXPECT(strstr(response, "UnknownPersona") != NULL);
  pf_string_free(response);

  snprintf(target, sizeof target, "/jobs/%s", "j999");
  EXPECT(pf_engine_wait_job(engine, "j999", 10, &response) == PF_E_UNKNOWN_JOB);
  EXPECT(pf_engine_request(NULL, "GET", target, NULL, &status, &response) == PF_E_INVALID_ARGUMENT);

  EXPECT(pf_network_request_count() == 0);
  pf_engine_close(engine);

  if (failures) fprintf(stderr, "%d failures\n", failures);
  else printf("capi smoke ok\n");
  return failures ? 1 : 0;
}
