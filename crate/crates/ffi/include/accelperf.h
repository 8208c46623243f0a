/* C interface for the accelperf analytical performance models. */

#pragma once

/* Generated with cbindgen:0.27.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Engine selector for `ap_attainable_flops`.
typedef enum ApEngine {
  AP_ENGINE_MATRIX = 0,
  AP_ENGINE_VECTOR = 1,
} ApEngine;

// Result of every fallible call.
typedef enum ApStatus {
  // Success.
  AP_STATUS_OK = 0,
  // A value violated a model precondition.
  AP_STATUS_INVALID_ARGUMENT = 1,
  // A name did not resolve to a preset or file.
  AP_STATUS_UNKNOWN_NAME = 2,
  // A spec or scenario file failed to parse.
  AP_STATUS_PARSE_ERROR = 3,
  // The filesystem call failed.
  AP_STATUS_IO_ERROR = 4,
  // A required pointer argument was null.
  AP_STATUS_NULL_ARGUMENT = 5,
  // A string argument was not valid UTF-8.
  AP_STATUS_INVALID_UTF8 = 6,
  // The model panicked; report this as a bug.
  AP_STATUS_INTERNAL_PANIC = 7,
} ApStatus;

// Opaque device handle.
typedef struct ApDevice ApDevice;

typedef struct ApGemmResult {
  double cycles;
  double achieved_flops;
  double utilization;
  double operational_intensity;
  // 1 when the bandwidth roof binds, 0 when compute does.
  int memory_bound;
  // Selected geometry as a NUL-terminated `CxHxW` label.
  char geometry[32];
} ApGemmResult;

typedef struct ApStreamResult {
  uint64_t cycles_per_body;
  double achieved_flops;
  double achieved_bytes_per_sec;
  double operational_intensity;
} ApStreamResult;

typedef struct ApGatherResult {
  double utilization;
  double useful_bytes_per_sec;
  double fetched_bytes_per_sec;
} ApGatherResult;

typedef struct ApCollectiveResult {
  double time_s;
  uint32_t steps;
  double algo_bytes_per_sec;
  double bus_bytes_per_sec;
  double utilization;
} ApCollectiveResult;

typedef struct ApEmbeddingResult {
  double time_s;
  double bandwidth_utilization;
  uint32_t launches;
  double achieved_bytes_per_sec;
} ApEmbeddingResult;

typedef struct ApAttentionResult {
  double time_s;
  double gather_time_s;
  double gemm_time_s;
  double tokens_per_sec;
  double processed_blocks;
} ApAttentionResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *ap_version(void);

// Message describing the most recent failure on this thread, or null.
// The pointer is valid until the next failing call on the same thread.
const char *ap_last_error(void);

// Creates a device from a bundled spec name ("gaudi2", "a100").
// Returns null on failure; see `ap_last_error`.
//
// # Safety
// `name` must be a NUL-terminated string.
struct ApDevice *ap_device_builtin(const char *name);

// Creates a device from a spec path, a name under the directory in
// `ACCELPERF_SPEC_DIR`, or a bundled name. Returns null on failure.
//
// # Safety
// `name_or_path` must be a NUL-terminated string.
struct ApDevice *ap_device_open(const char *name_or_path);

// Releases a device handle. Null is ignored.
//
// # Safety
// `device` must be null or a pointer from `ap_device_builtin`/`ap_device_open`
// that has not been freed.
void ap_device_free(struct ApDevice *device);

// Roofline-attainable flop rate at one operational intensity (flop/byte).
// `memory_bound` may be null when the caller only needs the rate.
//
// # Safety
// Pointer arguments must satisfy the conventions above.
enum ApStatus ap_attainable_flops(const struct ApDevice *device,
                                  double operational_intensity,
                                  enum ApEngine engine,
                                  double *out_flops,
                                  int *memory_bound);

// GEMM cycle/throughput estimate. A null `fixed_geometry` picks the best
// menu geometry; otherwise the `CxHxW` label is used as-is.
//
// # Safety
// Pointer arguments must satisfy the conventions above.
enum ApStatus ap_gemm(const struct ApDevice *device,
                      uint64_t m,
                      uint64_t k,
                      uint64_t n,
                      uint64_t element_bytes,
                      const char *fixed_geometry,
                      struct ApGemmResult *out);

// Streaming-kernel throughput for `cores` active cores (0 means all).
// `kernel` is one of "add", "scale", "triad".
//
// # Safety
// Pointer arguments must satisfy the conventions above.
enum ApStatus ap_stream(const struct ApDevice *device,
                        const char *kernel,
                        uint64_t access_bytes,
                        uint32_t unroll,
                        uint32_t extra_ops_per_element,
                        uint32_t cores,
                        struct ApStreamResult *out);

// Random gather (`scatter` = 0) or scatter (`scatter` = 1) bandwidth for
// one vector size.
//
// # Safety
// Pointer arguments must satisfy the conventions above.
enum ApStatus ap_gather(const struct ApDevice *device,
                        uint64_t vector_bytes,
                        double fraction_accessed,
                        int scatter,
                        struct ApGatherResult *out);

// Completion time of one collective. `kind` is one of "all_reduce",
// "all_gather", "reduce_scatter", "all_to_all", "reduce", "broadcast".
//
// # Safety
// Pointer arguments must satisfy the conventions above.
enum ApStatus ap_collective(const struct ApDevice *device,
                            const char *kind,
                            uint64_t payload_bytes,
                            uint32_t participants,
                            struct ApCollectiveResult *out);

// Embedding-lookup estimate. `layout` is "single_table" or
// "batched_table"; `rows_per_table` 0 selects 2^20 and `unroll` 0
// selects 4.
//
// # Safety
// Pointer arguments must satisfy the conventions above.
enum ApStatus ap_embedding(const struct ApDevice *device,
                           const char *layout,
                           uint32_t num_tables,
                           uint64_t rows_per_table,
                           uint64_t vector_bytes,
                           uint32_t pooling_factor,
                           uint32_t batch,
                           uint32_t unroll,
                           struct ApEmbeddingResult *out);

// Paged-attention decode estimate. `variant` is "block_table" or
// "block_list". Zero-valued head/block/element arguments select the
// 8B-model defaults (block 128, head dim 128, 32 query / 8 KV heads,
// 2-byte elements).
//
// # Safety
// Pointer arguments must satisfy the conventions above.
enum ApStatus ap_paged_attention(const struct ApDevice *device,
                                 const char *variant,
                                 uint32_t batch,
                                 uint64_t seq_len,
                                 double padded_fraction,
                                 uint64_t block_size,
                                 uint64_t head_dim,
                                 uint32_t num_query_heads,
                                 uint32_t num_kv_heads,
                                 uint64_t element_bytes,
                                 struct ApAttentionResult *out);

// Runs a scenario (name or path) on a device (name or path; null uses the
// scenario's default) and returns the report through `out_report`.
// `json` 0 emits CSV, nonzero emits JSON. Free the string with
// `ap_string_free`.
//
// # Safety
// Pointer arguments must satisfy the conventions above.
enum ApStatus ap_run_scenario(const char *scenario,
                              const char *device,
                              int json,
                              char **out_report);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `text` must be null or an unfreed pointer returned through an
// out-parameter of this library.
void ap_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
