#ifndef NOMWYV_H
#define NOMWYV_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define NOMWYV_API __declspec(dllexport)
#else
#define NOMWYV_API __attribute__((visibility("default")))
#endif

/* Exit-code compatible results. */
typedef enum nomwyv_status {
  NOMWYV_OK = 0,
  NOMWYV_TYPE_ERROR = 1,
  NOMWYV_SEPARATION = 2,
  NOMWYV_PARSE = 3,
  NOMWYV_STUCK = 4,
  NOMWYV_ASSERT_FAILED = 5,
  NOMWYV_USAGE = 64,
  NOMWYV_IO = 66,
  NOMWYV_INTERNAL = 70
} nomwyv_status;

typedef enum nomwyv_format { NOMWYV_FORMAT_TEXT = 0, NOMWYV_FORMAT_DOT = 1, NOMWYV_FORMAT_JSON = 2 } nomwyv_format;
typedef enum nomwyv_graph_kind { NOMWYV_GRAPH_SDG = 0, NOMWYV_GRAPH_NOMINAL = 1 } nomwyv_graph_kind;

typedef struct nomwyv_session nomwyv_session;

NOMWYV_API const char* nomwyv_version(void);
NOMWYV_API const char* nomwyv_status_name(nomwyv_status s);

NOMWYV_API nomwyv_session* nomwyv_session_create(void);
NOMWYV_API void nomwyv_session_destroy(nomwyv_session* s);

/* Options. Expansion applies to asserts and subtype queries. */
NOMWYV_API nomwyv_status nomwyv_set_expansion(nomwyv_session* s, int enabled);
NOMWYV_API nomwyv_status nomwyv_set_avoid_fuel(nomwyv_session* s, uint32_t fuel);
NOMWYV_API nomwyv_status nomwyv_set_trace(nomwyv_session* s, int enabled);
NOMWYV_API nomwyv_status nomwyv_set_color(nomwyv_session* s, int enabled);
NOMWYV_API nomwyv_status nomwyv_set_format(nomwyv_session* s, nomwyv_format f);

NOMWYV_API nomwyv_status nomwyv_load_prelude(nomwyv_session* s, const char* path);
NOMWYV_API nomwyv_status nomwyv_load_file(nomwyv_session* s, const char* path);
NOMWYV_API nomwyv_status nomwyv_load_source(nomwyv_session* s, const char* name, const char* text);

/* Commands. Results are read back with nomwyv_output and nomwyv_diagnostics. */
NOMWYV_API nomwyv_status nomwyv_check(nomwyv_session* s);
NOMWYV_API nomwyv_status nomwyv_subtype(nomwyv_session* s, const char* lhs, const char* rhs);
/* fuel < 0 evaluates without a fuel bound */
NOMWYV_API nomwyv_status nomwyv_run(nomwyv_session* s, int64_t fuel);
NOMWYV_API nomwyv_status nomwyv_graph(nomwyv_session* s, nomwyv_graph_kind kind);
NOMWYV_API nomwyv_status nomwyv_fuzz(nomwyv_session* s, uint64_t seed, uint64_t cases);

/* Valid until the next command on the same session. Never NULL for a live session. */
NOMWYV_API const char* nomwyv_output(const nomwyv_session* s);
NOMWYV_API const char* nomwyv_diagnostics(const nomwyv_session* s);

#ifdef __cplusplus
}
#endif

#endif
