// Copyright 2026 The homogkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the homogenization toolkit. Handles are opaque; every call
 * that can fail returns an hk_status and leaves a message for hk_last_error. */
#ifndef HOMOGKIT_H
#define HOMOGKIT_H

#include <stddef.h>

#if defined(_WIN32)
#define HK_API __declspec(dllexport)
#else
#define HK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hk_status {
  HK_OK = 0,
  HK_ERR_INVALID_ARGUMENT = 1,
  HK_ERR_DIMENSION_MISMATCH = 2,
  HK_ERR_RESOLUTION_GUARD = 3,
  HK_ERR_SOLVABILITY = 4,
  HK_ERR_SOLVER_DIVERGENCE = 5,
  HK_ERR_CONFIG = 6,
  HK_ERR_IO = 7,
  HK_ERR_CHECKS_FAILED = 8, /* the run finished but a check, or strict mode, failed */
  HK_ERR_INTERNAL = 9
} hk_status;

typedef struct hk_config hk_config;
typedef struct hk_run hk_run;
typedef struct hk_family hk_family;

HK_API const char* hk_version(void);
HK_API const char* hk_status_string(hk_status status);
/* Message of the last failed call on this thread; "" when there is none. */
HK_API const char* hk_last_error(void);
/* Releases strings returned through char** out-parameters. */
HK_API void hk_free(void* p);

/* Strict parsing: the error message lists every violation, one per line. */
HK_API hk_status hk_config_parse(const char* text, hk_config** out);
HK_API hk_status hk_config_load(const char* path, hk_config** out);
HK_API hk_status hk_config_serialize(const hk_config* cfg, char** text);
/* SHA-256 of the canonical serialization, 64 hex digits plus the terminator. */
HK_API hk_status hk_config_hash(const hk_config* cfg, char hex[65]);
HK_API const char* hk_config_subcommand(const hk_config* cfg);
HK_API void hk_config_free(hk_config* cfg);

typedef struct hk_run_options {
  const char* out_dir;    /* NULL: config, then HOMOG_KIT_OUT, then "homogkit_out" */
  const char* subcommand; /* NULL: the config's */
  unsigned long long seed;
  int has_seed;           /* nonzero: seed overrides the config */
  int threads;            /* 0: the config's */
  int strict;             /* nonzero: warnings fail the run */
} hk_run_options;

/* Runs the experiment. HK_OK means every check passed; HK_ERR_CHECKS_FAILED
 * means the run finished with a failed check. *out receives the run record
 * whenever a manifest was produced, including on failure. */
HK_API hk_status hk_run_experiment(const hk_config* cfg, const hk_run_options* opts, hk_run** out);
HK_API int hk_run_passed(const hk_run* run);
HK_API hk_status hk_run_manifest_json(const hk_run* run, char** json);
HK_API hk_status hk_run_summary_json(const hk_run* run, char** json);
HK_API void hk_run_free(hk_run* run);

/* Built-in coefficient family; params_json may be NULL. */
HK_API hk_status hk_family_create(const char* name, const char* params_json, hk_family** out);
HK_API hk_status hk_family_info(const hk_family* fam, int* d, int* m, double* mu, double* kappa, double* lambda0);
/* A_hat on an n-point torus; layout ((i*d + j)*m + alpha)*m + beta, len >= d*d*m*m. */
HK_API hk_status hk_family_homogenize(const hk_family* fam, int n, double tol, double* a_hat, size_t len);
HK_API void hk_family_free(hk_family* fam);

#ifdef __cplusplus
}
#endif

#endif
