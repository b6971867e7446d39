/*
 * Copyright 2026 The neuronlock Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * neuronlock C API.
 *
 * Every function returns an nl_status; on failure a description is available
 * from nl_last_error() on the same thread. Strings handed out through
 * `char **` parameters are owned by the caller and released with
 * nl_string_free(). Paths are UTF-8.
 */

#ifndef NEURONLOCK_H_
#define NEURONLOCK_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NL_API __declspec(dllexport)
#else
#define NL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nl_status {
  NL_OK = 0,
  NL_BAD_MAGIC = 1,
  NL_UNSUPPORTED_VERSION = 2,
  NL_TRUNCATED_TENSOR = 3,
  NL_UNKNOWN_DTYPE = 4,
  NL_OUT_OF_RANGE = 5,
  NL_SHAPE_MISMATCH = 6,
  NL_ENCRYPTED_MODEL = 7,
  NL_MISMATCHED_NEURON_COUNT = 8,
  NL_DUPLICATE_TASK = 9,
  NL_UNKNOWN_TASK = 10,
  NL_ALL_ZERO_SCORES = 11,
  NL_THRESHOLD_UNREACHABLE = 12,
  NL_INDEX_OUT_OF_RANGE = 13,
  NL_MISSING_TASK_POLICY = 14,
  NL_EMPTY_ATTRIBUTE_SET = 15,
  NL_INVALID_POLICY = 16,
  NL_MISSING_SUBSET_KEY = 17,
  NL_SPAN_TOO_LARGE = 18,
  NL_UNSUPPORTED_DTYPE = 19,
  NL_RANGES_OVERLAP = 20,
  NL_KEY_MAP_LENGTH_MISMATCH = 21,
  NL_ARTIFACT_MISMATCH = 22,
  NL_BAD_MASTER_KEY = 23,
  NL_INVALID_ARGUMENT = 24,
  NL_IO = 25,
  NL_CRYPTO = 26,
  NL_INTERNAL = 100
} nl_status;

typedef enum nl_dtype { NL_FLOAT32 = 0, NL_FLOAT16 = 1, NL_INT8 = 2 } nl_dtype;

typedef enum nl_decrypt_mode {
  NL_MODE_TRANSMISSION_EFFICIENT = 0, /* trial decryption, no key map */
  NL_MODE_COMPUTATION_EFFICIENT = 1   /* key map lookup */
} nl_decrypt_mode;

typedef enum nl_decrypt_status { NL_DECRYPT_FULL = 0, NL_DECRYPT_PARTIAL = 1, NL_DECRYPT_ZERO = 2 } nl_decrypt_status;

NL_API const char *nl_version(void);
NL_API const char *nl_status_name(nl_status status);
/* Message of the last failed call on this thread; "" if none. */
NL_API const char *nl_last_error(void);
NL_API void nl_string_free(char *s);

/* ---- models ---- */

typedef struct nl_model nl_model;

typedef struct nl_model_info {
  nl_dtype dtype;
  uint32_t layers;
  uint64_t neurons;
  uint32_t d_in;  /* input width of the first block */
  uint32_t d_out; /* output width, after the head if present */
  int encrypted;
  uint64_t nonce;
  uint64_t mlp_bytes;
} nl_model_info;

NL_API nl_status nl_model_load(const char *path, nl_model **out);
NL_API nl_status nl_model_save(const nl_model *model, const char *path);
NL_API void nl_model_free(nl_model *model);
NL_API nl_status nl_model_info_get(const nl_model *model, nl_model_info *out);
/* Writes min(out_cap, d_out) outputs and sets *out_len to d_out. */
NL_API nl_status nl_model_forward(const nl_model *model, const float *x, size_t x_len, float *out, size_t out_cap,
                                  size_t *out_len);

/* Accumulates a `.trace` for `task` from `rows` inputs of width d_in stored
 * row-major in `x`. */
NL_API nl_status nl_trace(const nl_model *model, const char *task, const float *x, size_t rows, const char *out_path);

/* ---- developer side ---- */

typedef struct nl_task_params {
  const char *task;
  double lambda;
  double tau;
} nl_task_params;

typedef struct nl_encrypt_options {
  const char *model;
  const char *const *traces;
  size_t trace_count;
  const char *policy_file;
  const char *out_prefix;
  const char *master_key; /* optional: reuse an existing authority */
  double lambda;          /* <= 0 selects the default */
  double tau;             /* <= 0 selects the default */
  const nl_task_params *task_params; /* optional per-task overrides */
  size_t task_param_count;
  size_t calibration_samples; /* 0 selects the default */
  const uint64_t *seed;       /* optional; OS entropy otherwise */
} nl_encrypt_options;

/* Writes <out_prefix>.snm/.abk/.kmap/.thr/.msk/.selection.json and returns a
 * JSON summary through `summary` (may be NULL). */
NL_API nl_status nl_encrypt(const nl_encrypt_options *opts, char **summary);

/* Issues an attribute key. `summary` (may be NULL) receives JSON with the key
 * size and timing. */
NL_API nl_status nl_keygen(const char *master_key, const char *const *attributes, size_t attribute_count,
                           const char *out_path, const uint64_t *seed, char **summary);

/* Calibrates detection thresholds on a plaintext model. */
NL_API nl_status nl_calibrate(const char *model, size_t samples, const uint64_t *seed, const char *out_path,
                              char **report);

/* ---- deployer side ---- */

typedef struct nl_decrypt_options {
  const char *model;
  const char *bundle;
  const char *secret_key;
  const char *out;
  nl_decrypt_mode mode;
  const char *key_map;    /* required for NL_MODE_COMPUTATION_EFFICIENT */
  const char *thresholds; /* optional override of the bundle's thresholds */
  const char *report;     /* optional JSON report path */
} nl_decrypt_options;

typedef struct nl_decrypt_result {
  nl_decrypt_status status;
  uint64_t total_neurons;
  uint64_t decrypted;
  uint64_t pruned;
  uint64_t trials;
  uint64_t detection_mismatches;
  uint64_t keys;
  double seconds;
} nl_decrypt_result;

NL_API nl_status nl_decrypt(const nl_decrypt_options *opts, nl_decrypt_result *result, char **report);

/* ---- tooling ---- */

NL_API nl_status nl_inspect(const char *path, char **json);
/* `scenario_json` may be NULL for the default scenario. */
NL_API nl_status nl_bench(const char *scenario_json, char **json);

/* Writes a planted multi-task demo into `out_dir`: model.snm, one
 * <task>.trace per task and policies.txt (each task gated on an attribute
 * named after it in lower case). */
NL_API nl_status nl_synth_suite(const char *out_dir, nl_dtype dtype, const char *const *tasks, size_t task_count,
                                uint64_t seed, char **summary);

#ifdef __cplusplus
}
#endif

#endif /* NEURONLOCK_H_ */
