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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homog/experiment.hpp"

using namespace homog;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("homogkit_test_" + name);
  fs::remove_all(p);
  return p;
}

const fs::path kConfigs = fs::path(HOMOGKIT_SOURCE_DIR) / "configs";

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

}  // namespace

TEST_CASE("config: minimal cell config fills defaults") {
  const auto c = parse_config(R"({"subcommand": "cell", "family": "constant", "n": 32})");
  CHECK(c.subcommand == "cell");
  CHECK(c.n == 32);
  CHECK(c.tol == 1e-10);
  CHECK(c.lambda_default);
  CHECK(c.threads == 1);
  CHECK(c.eps == std::vector<double>{1.0});
  CHECK_FALSE(c.output.has_value());
}

TEST_CASE("config: dyadic guard is named") {
  const auto v = violations_of(R"({"subcommand": "rates", "family": "trig", "eps": ["1/4", "1/3"]})");
  REQUIRE_FALSE(v.empty());
  bool named = false;
  for (const auto& m : v) named = named || m.find("eps must be dyadic") != std::string::npos;
  CHECK(named);
}

TEST_CASE("config: every violation is reported with its line") {
  const auto v = violations_of("{\"subcommand\": \"cell\",\n \"n\": 2,\n \"colour\": 1,\n \"tol\": -1,\n \"load\": \"ramp\"}");
  REQUIRE(v.size() == 4);
  CHECK(v[0].rfind("line 2: n", 0) == 0);
  CHECK(v[1].rfind("line 3: colour", 0) == 0);
  CHECK(v[2].rfind("line 4: tol", 0) == 0);
  CHECK(v[3].rfind("line 5: load", 0) == 0);
  const auto syn = violations_of("{\"n\": 32,\n\n \"tol\" 1e-9}");
  REQUIRE(syn.size() == 1);
  CHECK(syn[0].find("line 3") != std::string::npos);
  CHECK(violations_of(R"({"subcommand": "solve", "family": "trig", "eps": 0.25, "n": 32})").size() == 1);
  CHECK(violations_of(R"({"subcommand": "solve", "family": "trig", "eps": 0.25, "n": 32, "guard_override": true})").empty());
  CHECK(violations_of(R"({"family": {"name": "trig", "params": {"d": 2, "gamma": 1}}})").size() == 1);
  CHECK(violations_of(R"({"checks": [{"metric": "a_hat", "max": 1}]})").size() == 1);
}

TEST_CASE("config: shipped rates example round-trips") {
  const auto a = parse_config(slurp(kConfigs / "rates_trig_2d.json"));
  const auto b = parse_config(serialize_config(a));
  CHECK(config_to_json(a) == config_to_json(b));
  CHECK(serialize_config(a) == serialize_config(b));
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 64);
  auto c = a;
  c.seed += 1;
  CHECK(config_hash(c) != config_hash(a));
}

TEST_CASE("run: validate passes on every shipped config") {
  const fs::path out = scratch("validate");
  RunOptions o;
  o.out = out.string();
  o.subcommand = "validate";
  int n = 0;
  for (const auto& e : fs::directory_iterator(kConfigs)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    const auto rm = run_experiment(parse_config(slurp(e.path())), o);
    CHECK(rm.passed);
    ++n;
  }
  CHECK(n >= 6);
  std::ifstream log(out / "manifests.jsonl");
  int lines = 0;
  for (std::string l; std::getline(log, l);) ++lines;
  CHECK(lines == n);
}

TEST_CASE("run: homogenize on the laminate example gives the harmonic mean") {
  const fs::path out = scratch("homogenize");
  RunOptions o;
  o.out = out.string();
  const auto rm = run_experiment(parse_config(slurp(kConfigs / "homogenize_laminate_1d.json")), o);
  REQUIRE(rm.passed);
  const auto j = nlohmann::json::parse(slurp(out / "homogenize.json"));
  CHECK(j.at("a_hat").at(0).at(0).get<double>() == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(fs::exists(out / "homogenized.csv"));
}

TEST_CASE("run: reruns are bit-identical and manifests append") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const auto cfg = parse_config(slurp(kConfigs / "solve_trig_2d.json"));
  RunOptions o;
  o.out = a.string();
  REQUIRE(run_experiment(cfg, o).passed);
  REQUIRE(run_experiment(cfg, o).passed);
  o.out = b.string();
  REQUIRE(run_experiment(cfg, o).passed);
  CHECK(slurp(a / "solve_u.csv") == slurp(b / "solve_u.csv"));
  std::ifstream log(a / "manifests.jsonl");
  std::vector<nlohmann::json> ms;
  for (std::string l; std::getline(log, l);) ms.push_back(nlohmann::json::parse(l));
  REQUIRE(ms.size() == 2);
  CHECK(ms[0].at("config_hash") == ms[1].at("config_hash"));
  CHECK(ms[0].at("status") == "passed");
}

TEST_CASE("run: failing checks and errors still emit a manifest") {
  const fs::path out = scratch("fail");
  RunOptions o;
  o.out = out.string();
  auto cfg = parse_config(R"({"subcommand": "homogenize", "family": "constant", "n": 8,
                              "checks": [{"metric": "/A_hat/0", "min": 2.0}, {"metric": "/nothing", "max": 1}]})");
  auto rm = run_experiment(cfg, o);
  CHECK(rm.ok);
  CHECK_FALSE(rm.passed);
  CHECK(rm.manifest.at("status") == "checks_failed");
  CHECK(rm.manifest.at("checks").at(1).at("note") == "metric missing from summary");
  o.subcommand = "rates";
  rm = run_experiment(cfg, o);
  CHECK_FALSE(rm.passed);
  CHECK(rm.error == ErrorKind::Config);
  std::ifstream log(out / "manifests.jsonl");
  int lines = 0;
  for (std::string l; std::getline(log, l);) ++lines;
  CHECK(lines == 2);
}

TEST_CASE("run: strict mode fails on warnings") {
  const fs::path out = scratch("strict");
  RunOptions o;
  o.out = out.string();
  const auto cfg = parse_config(R"({"subcommand": "correctors", "family": "trig", "eps": 0.25, "n": 32, "guard_override": true})");
  CHECK(run_experiment(cfg, o).passed);
  o.strict = true;
  const auto rm = run_experiment(cfg, o);
  CHECK_FALSE(rm.passed);
  CHECK_FALSE(rm.manifest.at("warnings").empty());
}

TEST_CASE("run: output directory precedence") {
  ExperimentConfig cfg;
  RunOptions o;
  ::unsetenv("HOMOG_KIT_OUT");
  CHECK(resolve_output_dir(cfg, o) == "homogkit_out");
  ::setenv("HOMOG_KIT_OUT", "/tmp/from_env", 1);
  CHECK(resolve_output_dir(cfg, o) == "/tmp/from_env");
  cfg.output = "/tmp/from_config";
  CHECK(resolve_output_dir(cfg, o) == "/tmp/from_config");
  o.out = "/tmp/from_flag";
  CHECK(resolve_output_dir(cfg, o) == "/tmp/from_flag");
  ::unsetenv("HOMOG_KIT_OUT");
}
