#ifndef HETFLOCK_H
#define HETFLOCK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum HfStatus {
  HF_STATUS_OK = 0,
  HF_STATUS_NULL_POINTER = 1,
  HF_STATUS_INVALID_ARGUMENT = 2,
  HF_STATUS_INVALID_CONFIG = 3,
  HF_STATUS_UNKNOWN_SCENARIO = 4,
  HF_STATUS_PARSE = 5,
  HF_STATUS_INSTABILITY = 6,
  HF_STATUS_COINCIDENT = 7,
  HF_STATUS_IO = 8,
  HF_STATUS_BUFFER_TOO_SMALL = 9,
  HF_STATUS_PANIC = 10,
} HfStatus;

// Opaque scenario configuration.
typedef struct HfConfig HfConfig;

// Opaque running simulation.
typedef struct HfSimulation HfSimulation;

// Snapshot of the per-step statistics. Absent distances are NaN.
typedef struct HfMetrics {
  double time;
  size_t n_edges;
  size_t n_components;
  double mean_all_dist;
  double mean_conn_dist;
  double min_conn_dist;
  double max_conn_dist;
  size_t n_violation_edges;
} HfMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to fit). Returns the full message length in bytes
// excluding the NUL, or 0 when there is no message.
//
// # Safety
// `buf` must be null or point to at least `len` writable bytes.
size_t hf_last_error_message(char *buf, size_t len);

// Creates a config from a named preset (`"homogeneous"` or `"heterogeneous"`).
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum HfStatus hf_config_preset(const char *name, struct HfConfig **out);

// Parses a TOML config layered onto `default_scenario` (or onto the preset
// the document names itself).
//
// # Safety
// Both strings must be NUL-terminated; `out` must be writable.
enum HfStatus hf_config_from_toml(const char *text,
                                  const char *default_scenario,
                                  struct HfConfig **out);

// Writes the fully resolved config as TOML.
//
// # Safety
// `buf` must be null or point to `len` writable bytes; `required` may be null.
enum HfStatus hf_config_to_toml(const struct HfConfig *cfg,
                                char *buf,
                                size_t len,
                                size_t *required);

// # Safety
// `cfg` must be a live handle or null.
enum HfStatus hf_config_set_seed(struct HfConfig *cfg, uint64_t seed);

// # Safety
// `cfg` must be a live handle or null.
enum HfStatus hf_config_set_duration(struct HfConfig *cfg, double seconds);

// # Safety
// `cfg` must be a live handle or null.
enum HfStatus hf_config_set_dt(struct HfConfig *cfg, double seconds);

// # Safety
// `cfg` must be a live handle or null.
enum HfStatus hf_config_set_negotiation(struct HfConfig *cfg, bool enabled);

// Worker threads for control evaluation; results do not depend on it.
//
// # Safety
// `cfg` must be a live handle or null.
enum HfStatus hf_config_set_workers(struct HfConfig *cfg, size_t workers);

// # Safety
// `cfg` must be null or a handle not yet freed.
void hf_config_free(struct HfConfig *cfg);

// Runs `cfg` to completion and writes the output bundle (metrics, heatmap,
// final state, config echo) into `dir`.
//
// # Safety
// `cfg` must be a live handle; `dir` a NUL-terminated path.
enum HfStatus hf_run_to_dir(const struct HfConfig *cfg, const char *dir);

// Validates `cfg` and draws the initial state from its seed. The config
// handle stays owned by the caller.
//
// # Safety
// `cfg` must be a live handle; `out` must be writable.
enum HfStatus hf_sim_new(const struct HfConfig *cfg, struct HfSimulation **out);

// Advances `n_steps` steps, stopping at the first error.
//
// # Safety
// `sim` must be a live handle.
enum HfStatus hf_sim_step(struct HfSimulation *sim, size_t n_steps);

// Steps until the configured duration has elapsed.
//
// # Safety
// `sim` must be a live handle.
enum HfStatus hf_sim_run(struct HfSimulation *sim);

// Number of agents, or 0 for a null handle.
//
// # Safety
// `sim` must be null or a live handle.
size_t hf_sim_n_agents(const struct HfSimulation *sim);

// Simulated time in seconds, or NaN for a null handle.
//
// # Safety
// `sim` must be null or a live handle.
double hf_sim_time(const struct HfSimulation *sim);

// Writes interleaved `x0, y0, x1, y1, ...` positions; `len` counts doubles.
//
// # Safety
// `xy` must point to `len` writable doubles.
enum HfStatus hf_sim_positions(const struct HfSimulation *sim, double *xy, size_t len);

// Writes interleaved velocities; `len` counts doubles.
//
// # Safety
// `xy` must point to `len` writable doubles.
enum HfStatus hf_sim_velocities(const struct HfSimulation *sim, double *xy, size_t len);

// Statistics of the current state.
//
// # Safety
// `sim` must be a live handle; `out` must be writable.
enum HfStatus hf_sim_metrics(const struct HfSimulation *sim, struct HfMetrics *out);

// # Safety
// `sim` must be null or a handle not yet freed.
void hf_sim_free(struct HfSimulation *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HETFLOCK_H */
