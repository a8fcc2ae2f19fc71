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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "homog/error.hpp"

namespace homog {

/// Every violation found while parsing, ordered by line.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Acceptance check on a scalar of the run summary, addressed by JSON pointer.
struct Check {
  std::string metric;
  std::optional<double> min, max;
};

/// Experiment description. The text format is JSON with the keys below; unknown keys are errors.
struct ExperimentConfig {
  std::string subcommand;  ///< cell, homogenize, solve, correctors, green, rates, validate
  std::string family = "constant";
  nlohmann::json params = nlohmann::json::object();
  int n = 32;                        ///< torus points (cell, homogenize) or box cells per axis
  std::vector<double> eps{1.0};      ///< one value except for rates
  double tol = 1e-10;
  bool lambda_default = true;        ///< "lambda": "default" selects lambda0 + 1
  double lambda = 0.0;
  bool homogenized = false;          ///< solve: use the homogenized operator
  int cell_n = 0;                    ///< torus resolution for homogenized coefficients; 0 selects a default
  double points_per_period = 16.0;   ///< rates grid rule
  int fixed_cells = 0;               ///< rates: one grid for every eps
  bool correctors = true;            ///< rates: record the expansion error
  std::string load = "one";          ///< one, sine, bump
  std::string boundary = "zero";     ///< solve: zero or affine (1 + x_1) boundary data
  bool guard_override = false;
  std::vector<std::string> probes;   ///< rates: W1p, Holder, Lipschitz, MaxPrinciple
  bool svg = false;
  std::vector<double> y;             ///< green: source point (snapped to the grid); empty selects the centre
  std::vector<double> x;             ///< green: reciprocity partner; empty skips the check
  double rho = 0.0;                  ///< green: mollifier radius; 0 selects 2h
  std::optional<std::string> output;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<Check> checks;
};

/// Parses and validates. Syntax errors name the line; guard violations name the guard.
ExperimentConfig parse_config(const std::string& text);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Canonical text: parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& cfg);
/// SHA-256 (hex) of the canonical text.
std::string config_hash(const ExperimentConfig& cfg);

const char* toolkit_version();

struct RunOptions {
  std::optional<std::string> out;  ///< overrides the config and HOMOG_KIT_OUT
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> subcommand;  ///< must agree with the config when both are set
  bool strict = false;                    ///< warnings fail the run
};

/// Output directory: --out, then the config, then HOMOG_KIT_OUT, then "homogkit_out".
std::string resolve_output_dir(const ExperimentConfig& cfg, const RunOptions& opts);

struct RunManifest {
  nlohmann::json manifest;  ///< also appended to <out>/manifests.jsonl
  nlohmann::json summary;   ///< subcommand results, the target of check metrics
  bool ok = false;          ///< the run finished and produced every declared output
  bool passed = false;      ///< ok, every check passed and (strict) no warnings
  std::optional<ErrorKind> error;
  std::string message;
};

/// Runs the experiment and writes its artifacts. Failures are reported in the
/// manifest, which is emitted for every run that reaches an output directory.
RunManifest run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

}  // namespace homog
