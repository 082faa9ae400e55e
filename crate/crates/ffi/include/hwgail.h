#ifndef HWGAIL_H
#define HWGAIL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum HwgStatus {
  HWG_STATUS_OK = 0,
  HWG_STATUS_INVALID_ARGUMENT = 1,
  HWG_STATUS_EPISODE_COMPLETE = 2,
  HWG_STATUS_FORMAT = 3,
  HWG_STATUS_IO = 4,
  HWG_STATUS_NON_FINITE = 5,
  HWG_STATUS_NULL_POINTER = 6,
  HWG_STATUS_PANIC = 7,
} HwgStatus;

// Which network a handle holds.
typedef enum HwgNetworkKind {
  HWG_NETWORK_KIND_ACTOR = 0,
  HWG_NETWORK_KIND_CRITIC = 1,
  HWG_NETWORK_KIND_DISCRIMINATOR = 2,
} HwgNetworkKind;

// A loaded network.
typedef struct HwgNetwork HwgNetwork;

// A partial trajectory of fixed horizon.
typedef struct HwgState HwgState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hwg_version(void);

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len - 1` bytes) and returns the full message length.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t hwg_last_error_message(char *buf, size_t len);

// Loads a checkpoint file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum HwgStatus hwg_network_load(const char *path, struct HwgNetwork **out_net);

// Releases a network; null is ignored.
//
// # Safety
// `net` must come from [`hwg_network_load`] and not be used afterwards.
void hwg_network_free(struct HwgNetwork *net);

// # Safety
// `net` must be a live handle; outputs must be writable.
enum HwgStatus hwg_network_info(const struct HwgNetwork *net,
                                enum HwgNetworkKind *kind,
                                size_t *horizon);

// Creates a state from `n_points` interleaved `x, y` coordinates.
//
// # Safety
// `xy` must hold `2 * n_points` values; `out_state` must be writable.
enum HwgStatus hwg_state_new(size_t horizon,
                             const double *xy,
                             size_t n_points,
                             struct HwgState **out_state);

// Releases a state; null is ignored.
//
// # Safety
// `state` must come from [`hwg_state_new`] and not be used afterwards.
void hwg_state_free(struct HwgState *state);

// Number of filled slots, or 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle.
size_t hwg_state_len(const struct HwgState *state);

// Appends a point in place.
//
// # Safety
// `state` must be a live handle.
enum HwgStatus hwg_state_push(struct HwgState *state, double x, double y);

// Reads the point at 0-based `index`.
//
// # Safety
// `state` must be a live handle; `x` and `y` writable.
enum HwgStatus hwg_state_point(const struct HwgState *state, size_t index, double *x, double *y);

// Next pen position chosen by an actor.
//
// # Safety
// Handles must be live; `x` and `y` writable.
enum HwgStatus hwg_actor_forward(const struct HwgNetwork *net,
                                 const struct HwgState *state,
                                 double *x,
                                 double *y);

// # Safety
// Handles must be live; `value` writable.
enum HwgStatus hwg_critic_forward(const struct HwgNetwork *net,
                                  const struct HwgState *state,
                                  double *value);

// Probability that `state` comes from the expert.
//
// # Safety
// Handles must be live; `prob` writable.
enum HwgStatus hwg_discriminator_forward(const struct HwgNetwork *net,
                                         const struct HwgState *state,
                                         double *prob);

// `Q(state, (x, y))` from a critic and a discriminator.
//
// # Safety
// Handles must be live; `q` writable.
enum HwgStatus hwg_q_value(const struct HwgNetwork *critic,
                           const struct HwgNetwork *discriminator,
                           const struct HwgState *state,
                           double x,
                           double y,
                           double gamma,
                           double *q);

// Curvature at 0-based index `t` and scale `delta` of an interleaved
// `x, y` polyline.
//
// # Safety
// `xy` must hold `2 * n_points` values; `kappa` writable.
enum HwgStatus hwg_curvature_at(const double *xy,
                                size_t n_points,
                                size_t t,
                                size_t delta,
                                double *kappa);

// Keeps the first `t0` points of `source_xy` (exactly `horizon` points) and
// lets the actor write the rest into `out_xy` (room for `horizon` points).
//
// # Safety
// `source_xy` must hold `2 * n_points` values and `out_xy` `2 * n_points`
// writable values.
enum HwgStatus hwg_generate_from_prefix(const struct HwgNetwork *actor,
                                        const double *source_xy,
                                        size_t n_points,
                                        size_t t0,
                                        double *out_xy);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HWGAIL_H */
