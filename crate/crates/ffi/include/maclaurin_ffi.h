#ifndef MACLAURIN_FFI_H
#define MACLAURIN_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum MclStatus {
  MCL_STATUS_OK = 0,
  // Bad argument, kernel spec or mode.
  MCL_STATUS_USAGE = 1,
  // Malformed serialized input.
  MCL_STATUS_DATA = 2,
  // Outside a convergence domain or theorem regime, or a negative
  // coefficient.
  MCL_STATUS_DOMAIN = 3,
  MCL_STATUS_NULL_POINTER = 4,
  // A Rust panic was caught at the boundary.
  MCL_STATUS_PANIC = 5,
} MclStatus;

// A sampled random Maclaurin feature map.
typedef struct MclFeatureMap MclFeatureMap;

// A dot product kernel `K(x, y) = f(<x, y>)`.
typedef struct MclKernel MclKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *mcl_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *mcl_version(void);

// Parses a kernel spec such as `poly:q=10,r=1` or `exp:sigma=0.5`.
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be writable.
enum MclStatus mcl_kernel_parse(const char *spec, struct MclKernel **out);

// # Safety
// `kernel` must be NULL or a handle from [`mcl_kernel_parse`] not yet freed.
void mcl_kernel_free(struct MclKernel *kernel);

// Maclaurin coefficient `a_n`.
//
// # Safety
// `kernel` must be a live handle; `out` must be writable.
enum MclStatus mcl_kernel_coefficient(const struct MclKernel *kernel, uint32_t n, double *out);

// `f(t)`.
//
// # Safety
// `kernel` must be a live handle; `out` must be writable.
enum MclStatus mcl_kernel_eval(const struct MclKernel *kernel, double t, double *out);

// `f'(t)`.
//
// # Safety
// `kernel` must be a live handle; `out` must be writable.
enum MclStatus mcl_kernel_eval_prime(const struct MclKernel *kernel, double t, double *out);

// `K(x, y)` for two vectors of length `len`.
//
// # Safety
// `x` and `y` must point to `len` readable doubles; `out` must be writable.
enum MclStatus mcl_kernel_value(const struct MclKernel *kernel,
                                const double *x,
                                const double *y,
                                uintptr_t len,
                                double *out);

// Smallest `D` guaranteeing sup error `eps` with probability `1 - delta` on
// the L1 ball of radius `radius` in `input_dim` dimensions.
//
// # Safety
// `kernel` must be a live handle; `out` must be writable.
enum MclStatus mcl_recommended_d(const struct MclKernel *kernel,
                                 uintptr_t input_dim,
                                 double radius,
                                 double eps,
                                 double delta,
                                 double p,
                                 uint64_t *out);

// Samples a feature map. `mode` is `plain`, `h01` or `truncated:<k>`; NULL
// means `plain`.
//
// # Safety
// `kernel` must be a live handle; `mode` must be NULL or a NUL-terminated
// string; `out` must be writable.
enum MclStatus mcl_map_build(const struct MclKernel *kernel,
                             uintptr_t input_dim,
                             uintptr_t num_features,
                             uint64_t seed,
                             const char *mode,
                             double p,
                             struct MclFeatureMap **out);

// # Safety
// `map` must be NULL or a live handle not yet freed.
void mcl_map_free(struct MclFeatureMap *map);

// Length of the vectors produced by [`mcl_map_apply`]; 0 for NULL.
//
// # Safety
// `map` must be NULL or a live handle.
uintptr_t mcl_map_output_dim(const struct MclFeatureMap *map);

// Maps `x` (length `len`) into `out` (length `out_len`, which must equal
// [`mcl_map_output_dim`]).
//
// # Safety
// `x` must point to `len` readable doubles and `out` to `out_len` writable
// doubles.
enum MclStatus mcl_map_apply(const struct MclFeatureMap *map,
                             const double *x,
                             uintptr_t len,
                             double *out,
                             uintptr_t out_len);

// Serializes the map to JSON. Free the string with [`mcl_string_free`].
//
// # Safety
// `map` must be a live handle; `out` must be writable.
enum MclStatus mcl_map_to_json(const struct MclFeatureMap *map, char **out);

// Restores a map serialized by [`mcl_map_to_json`] or the CLI.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum MclStatus mcl_map_from_json(const char *json, struct MclFeatureMap **out);

// # Safety
// `s` must be NULL or a string returned by this library and not yet freed.
void mcl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MACLAURIN_FFI_H */
