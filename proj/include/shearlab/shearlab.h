/* Copyright 2026 The shearlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libshearlab. Objects are opaque handles released by their
 * _destroy function. Every call returns a status; on failure a JSON error
 * description is available from shearlab_last_error() on the same thread.
 * Strings returned through char** are owned by the caller and released with
 * shearlab_string_free. */

#ifndef SHEARLAB_SHEARLAB_H
#define SHEARLAB_SHEARLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SHEARLAB_API __declspec(dllexport)
#else
#define SHEARLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum shearlab_status {
  SHEARLAB_OK = 0,
  SHEARLAB_ERR_INVALID_ARGUMENT = 1, /* null handle, bad size, bad option */
  SHEARLAB_ERR_CONFIG = 2,           /* configuration file or value */
  SHEARLAB_ERR_PARSE = 3,            /* field program syntax */
  SHEARLAB_ERR_PIPELINE = 4,         /* numerical stage failed */
  SHEARLAB_ERR_CHECK_FAILED = 5,     /* ran to completion but a verdict was negative */
  SHEARLAB_ERR_IO = 6,
  SHEARLAB_ERR_INTERNAL = 7
} shearlab_status;

typedef struct shearlab_field shearlab_field;
typedef struct shearlab_cycle shearlab_cycle;
typedef struct shearlab_session shearlab_session;

SHEARLAB_API const char* shearlab_version(void);
SHEARLAB_API const char* shearlab_status_string(shearlab_status status);
/* JSON object {"status", "kind", "message", ...} for the last failure on this thread. */
SHEARLAB_API const char* shearlab_last_error(void);
SHEARLAB_API void shearlab_string_free(char* s);

/* Field programs. */
SHEARLAB_API shearlab_status shearlab_field_parse(const char* source, shearlab_field** out);
SHEARLAB_API void shearlab_field_destroy(shearlab_field* field);
SHEARLAB_API int shearlab_field_dim(const shearlab_field* field);
SHEARLAB_API shearlab_status shearlab_field_set_param(shearlab_field* field, const char* name,
                                                      double value);

/* Limit cycles. `tolerance` is the integrator tolerance; nodes <= 0 selects the default. */
SHEARLAB_API shearlab_status shearlab_cycle_find(const shearlab_field* field, const double* guess,
                                                 size_t n, double tolerance, int nodes,
                                                 shearlab_cycle** out);
SHEARLAB_API void shearlab_cycle_destroy(shearlab_cycle* cycle);
SHEARLAB_API double shearlab_cycle_period(const shearlab_cycle* cycle);
SHEARLAB_API double shearlab_cycle_length(const shearlab_cycle* cycle);
SHEARLAB_API shearlab_status shearlab_cycle_point(const shearlab_cycle* cycle, double s,
                                                  double* x, size_t n);

/* Time-T map of the pulsed flow; x_out may alias x. */
SHEARLAB_API shearlab_status shearlab_time_T_map(const shearlab_field* field, double rho, double T,
                                                 double epsilon, const double* x, size_t n,
                                                 double tolerance, double* x_out);

/* Runs. A session holds a loaded configuration plus run overrides. */
SHEARLAB_API shearlab_status shearlab_session_open(const char* config_path,
                                                   shearlab_session** out);
SHEARLAB_API void shearlab_session_destroy(shearlab_session* session);
SHEARLAB_API shearlab_status shearlab_session_set_out_dir(shearlab_session* session,
                                                          const char* dir);
SHEARLAB_API shearlab_status shearlab_session_set_seed(shearlab_session* session, uint64_t seed);
SHEARLAB_API shearlab_status shearlab_session_set_threads(shearlab_session* session, int threads);
/* Runs a command and returns its JSON summary (also written to the output
 * directory). SHEARLAB_ERR_CHECK_FAILED still fills summary_json. */
SHEARLAB_API shearlab_status shearlab_session_run(shearlab_session* session, const char* command,
                                                  char** summary_json);

/* One acceptance criterion (1..10) on the reference system; result as JSON. */
SHEARLAB_API shearlab_status shearlab_validate_criterion(int id, uint64_t seed, int threads,
                                                         char** result_json);

#ifdef __cplusplus
}
#endif

#endif /* SHEARLAB_SHEARLAB_H */
