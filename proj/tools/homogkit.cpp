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

// Command-line front end. Every subcommand reads an experiment config, runs it
// through the C interface and exits 0 only when all requested checks pass.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "homogkit/homogkit.h"

namespace {

struct Flags {
  std::vector<std::string> configs;
  std::string out;
  long long seed = -1;
  int threads = 0;
  bool strict = false;
};

/// 0 passed, 1 checks failed, 2 configuration error, 3 run failure, 4 i/o error.
int exit_code(hk_status s) {
  switch (s) {
    case HK_OK: return 0;
    case HK_ERR_CHECKS_FAILED: return 1;
    case HK_ERR_CONFIG: return 2;
    case HK_ERR_IO: return 4;
    default: return 3;
  }
}

int run_one(const std::string& sub, const std::string& path, const Flags& f) {
  hk_config* cfg = nullptr;
  hk_status s = hk_config_load(path.c_str(), &cfg);
  if (s != HK_OK) {
    std::fprintf(stderr, "%s: %s\n%s\n", path.c_str(), hk_status_string(s), hk_last_error());
    return exit_code(s);
  }
  hk_run_options o{};
  o.out_dir = f.out.empty() ? nullptr : f.out.c_str();
  o.subcommand = sub.c_str();
  o.has_seed = f.seed >= 0;
  o.seed = f.seed >= 0 ? static_cast<unsigned long long>(f.seed) : 0ull;
  o.threads = f.threads;
  o.strict = f.strict ? 1 : 0;
  hk_run* run = nullptr;
  s = hk_run_experiment(cfg, &o, &run);
  if (s == HK_OK) {
    std::printf("%s %s: passed\n", sub.c_str(), path.c_str());
  } else {
    std::fprintf(stderr, "%s %s: %s: %s\n", sub.c_str(), path.c_str(), hk_status_string(s), hk_last_error());
  }
  if (run != nullptr && s != HK_OK) {
    char* text = nullptr;
    if (hk_run_manifest_json(run, &text) == HK_OK) {
      const auto manifest = nlohmann::json::parse(text);
      hk_free(text);
      for (const auto& c : manifest.at("checks"))
        if (!c.at("pass").get<bool>())
          std::fprintf(stderr, "  check %s failed: %s\n", c.at("metric").get<std::string>().c_str(),
                       c.contains("value") ? c.at("value").dump().c_str() : c.value("note", "").c_str());
      for (const auto& w : manifest.at("warnings")) std::fprintf(stderr, "  warning: %s\n", w.get<std::string>().c_str());
    }
  }
  hk_run_free(run);
  hk_config_free(cfg);
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic homogenization toolkit"};
  app.set_version_flag("--version", std::string(hk_version()));
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> subs{
      {"cell", "Cell correctors, homogenized coefficients and flux identities"},
      {"homogenize", "Homogenized coefficients only"},
      {"solve", "Dirichlet problem on the unit box"},
      {"correctors", "Dirichlet correctors and their boundary-layer diagnostics"},
      {"green", "Mollified Green matrix at a source point"},
      {"rates", "Convergence-rate sweep over dyadic eps"},
      {"validate", "Parse configs and check the coefficient family"}};
  for (const auto& [name, help] : subs) {
    CLI::App* sc = app.add_subcommand(name, help);
    auto* opt = sc->add_option("--config,configs", flags.configs, "Experiment config file(s)")->required();
    if (name != "validate") opt->expected(1);
    sc->add_option("--out", flags.out, "Output directory (overrides the config and HOMOG_KIT_OUT)");
    sc->add_option("--seed", flags.seed, "Seed for every randomized battery")->check(CLI::NonNegativeNumber);
    sc->add_option("--threads", flags.threads, "Worker threads (default 1)")->check(CLI::Range(1, 256));
    sc->add_flag("--strict", flags.strict, "Fail on any warning");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string sub = app.get_subcommands().front()->get_name();
  int worst = 0;
  for (const auto& path : flags.configs) worst = std::max(worst, run_one(sub, path, flags));
  return worst;
}
