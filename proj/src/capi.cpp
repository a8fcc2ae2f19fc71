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

#include "homogkit/homogkit.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "homog/bvp.hpp"
#include "homog/cell.hpp"
#include "homog/coefficients.hpp"
#include "homog/experiment.hpp"

struct hk_config {
  homog::ExperimentConfig cfg;
};
struct hk_run {
  homog::RunManifest run;
};
struct hk_family {
  homog::CoefficientSet cs;
};

namespace {

thread_local std::string g_last_error;

hk_status code_of(homog::ErrorKind k) {
  switch (k) {
    case homog::ErrorKind::InvalidArgument: return HK_ERR_INVALID_ARGUMENT;
    case homog::ErrorKind::DimensionMismatch: return HK_ERR_DIMENSION_MISMATCH;
    case homog::ErrorKind::ResolutionGuard: return HK_ERR_RESOLUTION_GUARD;
    case homog::ErrorKind::Solvability: return HK_ERR_SOLVABILITY;
    case homog::ErrorKind::SolverDivergence: return HK_ERR_SOLVER_DIVERGENCE;
    case homog::ErrorKind::Config: return HK_ERR_CONFIG;
    case homog::ErrorKind::Io: return HK_ERR_IO;
  }
  return HK_ERR_INTERNAL;
}

/// Runs f, translating exceptions into status codes.
template <class F>
hk_status guarded(F&& f) {
  g_last_error.clear();
  try {
    return f();
  } catch (const homog::Error& e) {
    g_last_error = e.what();
    return code_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HK_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HK_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return HK_ERR_INTERNAL;
  }
}

hk_status null_arg(const char* what) {
  g_last_error = std::string(what) + " is NULL";
  return HK_ERR_INVALID_ARGUMENT;
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

const char* hk_version(void) { return homog::toolkit_version(); }

const char* hk_status_string(hk_status s) {
  switch (s) {
    case HK_OK: return "ok";
    case HK_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HK_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case HK_ERR_RESOLUTION_GUARD: return "resolution guard";
    case HK_ERR_SOLVABILITY: return "solvability";
    case HK_ERR_SOLVER_DIVERGENCE: return "solver divergence";
    case HK_ERR_CONFIG: return "configuration error";
    case HK_ERR_IO: return "i/o error";
    case HK_ERR_CHECKS_FAILED: return "checks failed";
    case HK_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* hk_last_error(void) { return g_last_error.c_str(); }

void hk_free(void* p) { std::free(p); }

hk_status hk_config_parse(const char* text, hk_config** out) {
  if (text == nullptr) return null_arg("text");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto* h = new hk_config{homog::parse_config(text)};
    *out = h;
    return HK_OK;
  });
}

hk_status hk_config_load(const char* path, hk_config** out) {
  if (path == nullptr) return null_arg("path");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw homog::Error(homog::ErrorKind::Io, std::string("cannot read ") + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    *out = new hk_config{homog::parse_config(ss.str())};
    return HK_OK;
  });
}

hk_status hk_config_serialize(const hk_config* cfg, char** text) {
  if (cfg == nullptr) return null_arg("cfg");
  if (text == nullptr) return null_arg("text");
  return guarded([&] {
    *text = dup(homog::serialize_config(cfg->cfg));
    return HK_OK;
  });
}

hk_status hk_config_hash(const hk_config* cfg, char hex[65]) {
  if (cfg == nullptr) return null_arg("cfg");
  if (hex == nullptr) return null_arg("hex");
  return guarded([&] {
    const std::string h = homog::config_hash(cfg->cfg);
    std::memcpy(hex, h.c_str(), 65);
    return HK_OK;
  });
}

const char* hk_config_subcommand(const hk_config* cfg) { return cfg == nullptr ? "" : cfg->cfg.subcommand.c_str(); }

void hk_config_free(hk_config* cfg) { delete cfg; }

hk_status hk_run_experiment(const hk_config* cfg, const hk_run_options* opts, hk_run** out) {
  if (cfg == nullptr) return null_arg("cfg");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    homog::RunOptions ro;
    if (opts != nullptr) {
      if (opts->out_dir != nullptr) ro.out = opts->out_dir;
      if (opts->subcommand != nullptr) ro.subcommand = opts->subcommand;
      if (opts->has_seed) ro.seed = opts->seed;
      if (opts->threads > 0) ro.threads = opts->threads;
      ro.strict = opts->strict != 0;
    }
    auto* h = new hk_run{homog::run_experiment(cfg->cfg, ro)};
    *out = h;
    if (h->run.error) {
      g_last_error = h->run.message;
      return code_of(*h->run.error);
    }
    if (!h->run.passed) {
      g_last_error = "one or more checks failed";
      return HK_ERR_CHECKS_FAILED;
    }
    return HK_OK;
  });
}

int hk_run_passed(const hk_run* run) { return run != nullptr && run->run.passed ? 1 : 0; }

hk_status hk_run_manifest_json(const hk_run* run, char** json) {
  if (run == nullptr) return null_arg("run");
  if (json == nullptr) return null_arg("json");
  return guarded([&] {
    *json = dup(run->run.manifest.dump(2));
    return HK_OK;
  });
}

hk_status hk_run_summary_json(const hk_run* run, char** json) {
  if (run == nullptr) return null_arg("run");
  if (json == nullptr) return null_arg("json");
  return guarded([&] {
    *json = dup(run->run.summary.dump(2));
    return HK_OK;
  });
}

void hk_run_free(hk_run* run) { delete run; }

hk_status hk_family_create(const char* name, const char* params_json, hk_family** out) {
  if (name == nullptr) return null_arg("name");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    nlohmann::json params = nlohmann::json::object();
    if (params_json != nullptr) {
      try {
        params = nlohmann::json::parse(params_json);
      } catch (const nlohmann::json::parse_error& e) {
        throw homog::Error(homog::ErrorKind::Config, std::string("params: ") + e.what());
      }
    }
    *out = new hk_family{homog::builtin_family(name, params)};
    return HK_OK;
  });
}

hk_status hk_family_info(const hk_family* fam, int* d, int* m, double* mu, double* kappa, double* lambda0) {
  if (fam == nullptr) return null_arg("fam");
  return guarded([&] {
    if (d) *d = fam->cs.d;
    if (m) *m = fam->cs.m;
    if (mu) *mu = fam->cs.mu;
    if (kappa) *kappa = fam->cs.kappa;
    if (lambda0) *lambda0 = homog::estimate_lambda0(fam->cs);
    return HK_OK;
  });
}

hk_status hk_family_homogenize(const hk_family* fam, int n, double tol, double* a_hat, size_t len) {
  if (fam == nullptr) return null_arg("fam");
  if (a_hat == nullptr) return null_arg("a_hat");
  return guarded([&] {
    const std::size_t need = static_cast<std::size_t>(fam->cs.d * fam->cs.d * fam->cs.m * fam->cs.m);
    if (len < need) throw homog::Error(homog::ErrorKind::DimensionMismatch, "a_hat needs " + std::to_string(need) + " entries");
    homog::CellOptions o;
    if (tol > 0.0) o.tol = tol;
    const auto r = homog::run_cell(fam->cs, n, o);
    std::memcpy(a_hat, r.hats.A_hat.data(), need * sizeof(double));
    return HK_OK;
  });
}

void hk_family_free(hk_family* fam) { delete fam; }

}  // extern "C"
