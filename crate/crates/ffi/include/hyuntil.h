#ifndef HYUNTIL_H
#define HYUNTIL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum HyStatus {
  HY_STATUS_OK = 0,
  HY_STATUS_NULL_POINTER = 1,
  HY_STATUS_INVALID_UTF8 = 2,
  HY_STATUS_DIMENSION = 3,
  // The initial state is outside cl(C) u D.
  HY_STATUS_INITIAL_STATE = 4,
  HY_STATUS_INVALID = 5,
  HY_STATUS_PARSE = 6,
  HY_STATUS_CONFIG = 7,
  HY_STATUS_IO = 8,
  HY_STATUS_OUT_OF_RANGE = 9,
  HY_STATUS_PANIC = 10,
} HyStatus;

// Three-valued monitor verdict.
typedef enum HyVerdict {
  HY_VERDICT_SATISFIED = 0,
  HY_VERDICT_VIOLATED = 1,
  HY_VERDICT_UNKNOWN = 2,
} HyVerdict;

// Opaque set of arcs from one simulation.
typedef struct HyArcs HyArcs;

// Opaque scenario: a hybrid system with its propositions and certificates.
typedef struct HyScenario HyScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer is
// valid until the next call into this library from the same thread.
const char *hy_last_error(void);

// Frees a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void hy_string_free(char *s);

// Loads a built-in scenario by id.
//
// # Safety
// `id` must be a NUL-terminated string; `out` must be writable.
enum HyStatus hy_scenario_builtin(const char *id, struct HyScenario **out);

// Parses a scenario from TOML source. A `[settings]` table is ignored here;
// pass settings to each call instead.
//
// # Safety
// `src` must be a NUL-terminated string; `out` must be writable.
enum HyStatus hy_scenario_from_toml(const char *src, struct HyScenario **out);

// # Safety
// `s` must come from a scenario constructor and not be freed twice.
void hy_scenario_free(struct HyScenario *s);

// State dimension of the scenario, or 0 for NULL.
//
// # Safety
// `s` must be NULL or a live scenario handle.
size_t hy_scenario_dim(const struct HyScenario *s);

// Simulates from `x0` (length `n`), or from the scenario's default initial
// state when `x0` is NULL.
//
// # Safety
// `s` must be a live scenario; `x0` must be NULL or point to `n` doubles;
// `out` must be writable.
enum HyStatus hy_simulate(const struct HyScenario *s,
                          const double *x0,
                          size_t n,
                          const char *settings_toml,
                          struct HyArcs **out);

// # Safety
// `a` must come from [`hy_simulate`] and not be freed twice.
void hy_arcs_free(struct HyArcs *a);

// Number of arcs, or 0 for NULL.
//
// # Safety
// `a` must be NULL or a live arc set.
size_t hy_arcs_len(const struct HyArcs *a);

// Final ordinary time and jump count of arc `k`.
//
// # Safety
// `a` must be a live arc set; `t` and `j` must be writable.
enum HyStatus hy_arc_final_time(const struct HyArcs *a, size_t k, double *t, size_t *j);

// Copies the final state of arc `k` into `buf` (length `n`, at least the
// state dimension).
//
// # Safety
// `a` must be a live arc set; `buf` must point to `n` writable doubles.
enum HyStatus hy_arc_final_state(const struct HyArcs *a, size_t k, double *buf, size_t n);

// Whether arc `k` was classified as genuinely Zeno.
//
// # Safety
// `a` must be a live arc set; `zeno` must be writable.
enum HyStatus hy_arc_is_zeno(const struct HyArcs *a, size_t k, bool *zeno);

// Monitors the scenario's until formula. `mode` is "strong", "weak" or NULL
// for the scenario's own mode. `report` receives the JSON report when not
// NULL.
//
// # Safety
// `s` must be a live scenario; string arguments NULL or NUL-terminated;
// `verdict` writable; `report` NULL or writable.
enum HyStatus hy_monitor(const struct HyScenario *s,
                         const char *mode,
                         const char *settings_toml,
                         enum HyVerdict *verdict,
                         char **report);

// Checks the conditions of `theorem` (names as in the CLI). `variant` is
// "a".."d" or NULL. `exit_code` receives the CLI exit code: 0 certified,
// 1 failed or violated, 4 unknown.
//
// # Safety
// `s` must be a live scenario; string arguments NULL or NUL-terminated
// (`theorem` non-NULL); `exit_code` writable; `report` NULL or writable.
enum HyStatus hy_certify(const struct HyScenario *s,
                         const char *theorem,
                         const char *variant,
                         const char *settings_toml,
                         int32_t *exit_code,
                         char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYUNTIL_H */
