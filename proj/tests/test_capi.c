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

/* Exercises the C interface from a C translation unit. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "homogkit/homogkit.h"

static int failures = 0;

#define EXPECT(cond)                                                \
  do {                                                              \
    if (!(cond)) {                                                  \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                   \
    }                                                               \
  } while (0)

int main(int argc, char** argv) {
  const char* out = argc > 1 ? argv[1] : "capi_out";

  EXPECT(strlen(hk_version()) > 0);
  EXPECT(strcmp(hk_status_string(HK_ERR_CONFIG), "configuration error") == 0);

  hk_config* cfg = NULL;
  EXPECT(hk_config_parse(NULL, &cfg) == HK_ERR_INVALID_ARGUMENT);
  EXPECT(hk_config_parse("{\"n\": 2, \"bogus\": 1}", &cfg) == HK_ERR_CONFIG);
  EXPECT(cfg == NULL);
  EXPECT(strstr(hk_last_error(), "bogus") != NULL);
  EXPECT(strstr(hk_last_error(), "n: must lie") != NULL);
  EXPECT(hk_config_load("/nonexistent/config.json", &cfg) == HK_ERR_IO);

  const char* text =
      "{\"subcommand\": \"homogenize\", \"family\": {\"name\": \"laminate\", \"params\": {\"d\": 1}},"
      " \"n\": 256, \"checks\": [{\"metric\": \"/a_hat/0/0\", \"min\": 0.499, \"max\": 0.501}]}";
  EXPECT(hk_config_parse(text, &cfg) == HK_OK);
  EXPECT(strcmp(hk_config_subcommand(cfg), "homogenize") == 0);
  char hex[65];
  EXPECT(hk_config_hash(cfg, hex) == HK_OK);
  EXPECT(strlen(hex) == 64);

  char* canon = NULL;
  EXPECT(hk_config_serialize(cfg, &canon) == HK_OK);
  hk_config* again = NULL;
  EXPECT(hk_config_parse(canon, &again) == HK_OK);
  char hex2[65];
  EXPECT(hk_config_hash(again, hex2) == HK_OK);
  EXPECT(strcmp(hex, hex2) == 0);
  hk_free(canon);
  hk_config_free(again);

  hk_run_options opts;
  memset(&opts, 0, sizeof opts);
  opts.out_dir = out;
  hk_run* run = NULL;
  EXPECT(hk_run_experiment(cfg, &opts, &run) == HK_OK);
  EXPECT(hk_run_passed(run) == 1);
  char* summary = NULL;
  EXPECT(hk_run_summary_json(run, &summary) == HK_OK);
  EXPECT(summary != NULL && strstr(summary, "a_hat") != NULL);
  hk_free(summary);
  hk_run_free(run);

  opts.subcommand = "rates";
  run = NULL;
  EXPECT(hk_run_experiment(cfg, &opts, &run) == HK_ERR_CONFIG);
  EXPECT(run != NULL && hk_run_passed(run) == 0);
  hk_run_free(run);
  hk_config_free(cfg);

  hk_family* fam = NULL;
  EXPECT(hk_family_create("nope", NULL, &fam) == HK_ERR_INVALID_ARGUMENT);
  EXPECT(hk_family_create("laminate", "{\"d\": 2}", &fam) == HK_OK);
  int d = 0, m = 0;
  double mu = 0.0, kappa = -1.0, lambda0 = -1.0;
  EXPECT(hk_family_info(fam, &d, &m, &mu, &kappa, &lambda0) == HK_OK);
  EXPECT(d == 2 && m == 1 && mu > 0.0 && kappa == 0.0 && lambda0 == 0.0);
  double a_hat[4];
  EXPECT(hk_family_homogenize(fam, 64, 0.0, a_hat, 2) == HK_ERR_DIMENSION_MISMATCH);
  EXPECT(hk_family_homogenize(fam, 64, 0.0, a_hat, 4) == HK_OK);
  /* Laminate in y_1: harmonic mean across the layers, arithmetic mean along them. */
  EXPECT(fabs(a_hat[0] - 0.5) < 1e-3);
  EXPECT(fabs(a_hat[3] - 1.0 / sqrt(3.0)) < 1e-3);
  hk_family_free(fam);

  if (failures == 0) printf("capi: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
