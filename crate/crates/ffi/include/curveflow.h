#ifndef CURVEFLOW_H
#define CURVEFLOW_H

#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum {
  CF_STATUS_OK = 0,
  CF_STATUS_NULL_POINTER = 1,
  CF_STATUS_INVALID_ARGUMENT = 2,
  CF_STATUS_PARSE = 3,
  CF_STATUS_IO = 4,
  CF_STATUS_INVALID_NETWORK = 5,
  CF_STATUS_STEP_FAILED = 6,
  CF_STATUS_TOPOLOGY = 7,
  CF_STATUS_PRECONDITION = 8,
  CF_STATUS_PANIC = 9,
} CfStatus;

typedef struct CfForcing CfForcing;

typedef struct CfNetwork CfNetwork;

typedef struct CfTrace CfTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (nul-terminated,
// truncated to `cap`). Returns the full message length, 0 if none.
//
// # Safety
// `buf` must be null or point to `cap` writable bytes.
size_t cf_last_error(char *buf, size_t cap);

// Library version as a static nul-terminated string.
const char *cf_version(void);

// # Safety
// `s` must be null or a string returned by this library.
void cf_string_free(char *s);

// Polygon with `n` vertices on the circle of radius `r` about `(cx, cy)`.
//
// # Safety
// `out` must be a valid pointer.
CfStatus cf_network_circle(double r, size_t n, double cx, double cy, CfNetwork **out);

// Symmetric triod with arms of length `l`, each split into `n` segments.
//
// # Safety
// `out` must be a valid pointer.
CfStatus cf_network_triod(double l, size_t n, CfNetwork **out);

// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
CfStatus cf_network_from_json(const char *json, CfNetwork **out);

// # Safety
// `net` must be a live handle and `out` a valid pointer.
CfStatus cf_network_to_json(const CfNetwork *net, char **out);

// # Safety
// `net` must be null or a handle not yet freed.
void cf_network_free(CfNetwork *net);

// Total length of the network.
//
// # Safety
// Pointers must be valid.
CfStatus cf_network_length(const CfNetwork *net, double *out);

// # Safety
// Pointers must be valid.
CfStatus cf_network_vertex_count(const CfNetwork *net, size_t *out);

// Writes vertex coordinates as `x0, y0, x1, y1, ...` into `xy`, which must
// hold `2 * cf_network_vertex_count` doubles.
//
// # Safety
// `xy` must point to `cap` writable doubles.
CfStatus cf_network_vertices(const CfNetwork *net, double *xy, size_t cap);

// # Safety
// `out` must be a valid pointer.
CfStatus cf_forcing_zero(CfForcing **out);

// Field from its JSON description, e.g.
// `{"kind": "gaussian-swirl", "amplitude": 1, "width": 0.3}`.
//
// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
CfStatus cf_forcing_from_json(const char *json, CfForcing **out);

// # Safety
// Pointers must be valid.
CfStatus cf_forcing_mollify(const CfForcing *u, uint32_t m, CfForcing **out);

// Writes `u(x, y, t)` into `out_uv[0..2]`.
//
// # Safety
// `out_uv` must point to two writable doubles.
CfStatus cf_forcing_value(const CfForcing *u, double x, double y, double t, double *out_uv);

// # Safety
// `u` must be null or a handle not yet freed.
void cf_forcing_free(CfForcing *u);

// Runs the flow on `[0, t_end]`. `options_json` may be null for defaults.
// A run stopped by a step failure still yields a trace; check
// `cf_trace_failed`.
//
// # Safety
// Handles must be live; `options_json` null or nul-terminated; `out` valid.
CfStatus cf_flow_run(const CfNetwork *net,
                     const CfForcing *u,
                     double t_end,
                     const char *options_json,
                     CfTrace **out);

// # Safety
// `jsonl` must be a nul-terminated string and `out` a valid pointer.
CfStatus cf_trace_from_jsonl(const char *jsonl, CfTrace **out);

// # Safety
// Pointers must be valid.
CfStatus cf_trace_to_jsonl(const CfTrace *trace, char **out);

// # Safety
// Pointers must be valid.
CfStatus cf_trace_snapshot_count(const CfTrace *trace, size_t *out);

// Time, mass, `H` and `U` of snapshot `k`, written to `out4[0..4]`.
//
// # Safety
// `out4` must point to four writable doubles.
CfStatus cf_trace_snapshot(const CfTrace *trace, size_t k, double *out4);

// Final network of the trace as a new handle.
//
// # Safety
// Pointers must be valid.
CfStatus cf_trace_final_network(const CfTrace *trace, CfNetwork **out);

// Sets `*out` to 1 if the run stopped early, 0 otherwise.
//
// # Safety
// Pointers must be valid.
CfStatus cf_trace_failed(const CfTrace *trace, int32_t *out);

// # Safety
// `trace` must be null or a handle not yet freed.
void cf_trace_free(CfTrace *trace);

// Runs a check suite (`all`, `budgets`, `brakke`, `phases` or `structure`)
// with the given constant. Writes the JSON report to `report_json` and
// 1/0 to `all_pass`.
//
// # Safety
// `trace` live, `suite` nul-terminated, outputs valid.
CfStatus cf_verify(const CfTrace *trace,
                   const char *suite,
                   double c_mz,
                   char **report_json,
                   int32_t *all_pass);

// Dyadic step parameters `(c2, p, dt)` for `eps` in `(0, 1)` and `n >= 1`.
//
// # Safety
// Output pointers must be valid.
CfStatus cf_dyadic_step_params(double eps, uint32_t n, uint32_t *c2, int64_t *p, double *dt);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CURVEFLOW_H */
