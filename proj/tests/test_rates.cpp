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

#include <cmath>
#include <sstream>

#include "homog/error.hpp"
#include "homog/rates.hpp"
#include "homog/rng.hpp"

using namespace homog;

namespace {

SweepConfig trig_sweep() {
  SweepConfig cfg;
  cfg.family = "trig";
  cfg.params = {{"d", 2}, {"v", 0.5}, {"b", 0.5}, {"c", 0.5}};
  cfg.eps = {0.125, 0.0625, 0.03125};
  return cfg;
}

std::string csv(const ConvergenceReport& r) {
  std::ostringstream os;
  write_report_csv(os, r);
  return os.str();
}

}  // namespace

TEST_CASE("rates: fit_rate recovers exact and jittered slopes") {
  const auto one = fit_rate({{0.5, 0.5}, {0.25, 0.25}, {0.125, 0.125}});
  CHECK(one.slope == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(one.residual <= 1e-14);
  std::vector<std::pair<double, double>> sq;
  for (double e : {0.5, 0.25, 0.125, 0.0625}) sq.emplace_back(e, e * e);
  CHECK(fit_rate(sq).slope == doctest::Approx(2.0).epsilon(1e-14));
  Rng rng(7, 0);
  std::vector<std::pair<double, double>> jit;
  for (double e = 0.5; e > 1e-3; e /= 2) jit.emplace_back(e, e * (1.0 + rng.uniform(-0.05, 0.05)));
  const auto j = fit_rate(jit);
  CHECK(j.slope >= 0.93);
  CHECK(j.slope <= 1.07);
}

TEST_CASE("rates: fit_rate drops nonpositive errors and needs three points") {
  const auto f = fit_rate({{0.5, 0.5}, {0.25, 0.0}, {0.125, 0.125}, {0.0625, 0.0625}, {0.03125, -1.0}});
  CHECK(f.dropped == 2);
  CHECK(f.used == 3);
  CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(fit_rate({{0.5, 0.5}, {0.25, 0.0}, {0.125, 0.125}}), Error);
}

TEST_CASE("rates: sweep configuration guards") {
  SweepConfig cfg = trig_sweep();
  cfg.eps = {0.25, 1.0 / 3.0};
  try {
    validate_sweep(cfg);
    FAIL("expected a dyadic guard");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("eps must be dyadic") != std::string::npos);
    CHECK(e.kind() == ErrorKind::Config);
  }
  cfg.eps = {0.125, 0.25};
  CHECK_THROWS_AS(validate_sweep(cfg), Error);
  cfg.eps = {0.25, 0.125};
  cfg.points_per_period = 4.0;
  CHECK_THROWS_AS(validate_sweep(cfg), Error);
  cfg.points_per_period = 16.0;
  cfg.fixed_cells = 100;
  CHECK_THROWS_AS(validate_sweep(cfg), Error);
  CHECK_THROWS_AS(parse_load("ramp"), Error);
  CHECK_THROWS_AS(parse_probe("Sobolev"), Error);
}

TEST_CASE("rates: constant family has no homogenization error") {
  SweepConfig cfg;
  cfg.family = "constant";
  cfg.params = {{"d", 2}, {"a", 1.5}, {"v", 0.2}, {"b", 0.1}, {"c", 0.3}};
  cfg.eps = {0.25, 0.125, 0.0625};
  cfg.fixed_cells = 128;
  const auto r = run_sweep(cfg);
  REQUIRE(r.complete);
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) {
    CHECK(row.l2 <= 1e-9);
    CHECK(row.linf <= 1e-9);
    CHECK(row.w_h1 <= 1e-9);
  }
  CHECK_FALSE(r.has_rates);
}

TEST_CASE("rates: expansion error of the d=2 trig family") {
  const auto r = run_sweep(trig_sweep());
  REQUIRE(r.complete);
  REQUIRE(r.rows.size() == 3);
  double lo = 1e300, hi = 0.0;
  for (const auto& row : r.rows) {
    CHECK(row.w_boundary <= 1e-12);
    CHECK(row.triangle_slack >= -1e-10);
    CHECK(row.w_h1 <= row.h1);
    lo = std::min(lo, row.w_h1_interior / row.eps);
    hi = std::max(hi, row.w_h1_interior / row.eps);
  }
  CHECK(hi / lo <= 2.0);
  REQUIRE(r.has_rates);
  CHECK(r.l2_rate.slope >= 0.85);
  // Without correctors the H1 error does not decay at rate one.
  CHECK(r.h1_rate.slope <= 0.6);
}

TEST_CASE("rates: d=1 laminate rate") {
  SweepConfig cfg;
  cfg.family = "laminate";
  cfg.params = {{"d", 1}};
  cfg.eps = {0.125, 0.0625, 0.03125, 0.015625};
  cfg.points_per_period = 32.0;
  const auto r = run_sweep(cfg);
  REQUIRE(r.has_rates);
  CHECK(r.l2_rate.slope >= 0.85);
  CHECK(r.l2_rate.slope <= 1.15);
}

TEST_CASE("rates: reports are deterministic across reruns and thread counts") {
  SweepConfig cfg = trig_sweep();
  cfg.eps = {0.25, 0.125, 0.0625};
  const auto a = run_sweep(cfg);
  const auto b = run_sweep(cfg);
  cfg.threads = 3;
  const auto c = run_sweep(cfg);
  CHECK(csv(a) == csv(b));
  CHECK(csv(a) == csv(c));
  std::ostringstream svg;
  write_rate_svg(svg, a);
  CHECK(svg.str().find("<svg") == 0);
  CHECK(report_json(a)["rows"].size() == 3);
}

TEST_CASE("rates: uniform constant probes") {
  SweepConfig cst;
  cst.family = "constant";
  cst.params = {{"d", 2}, {"a", 1.0}};
  cst.eps = {0.25, 0.125, 0.0625};
  cst.fixed_cells = 128;
  for (ProbeKind k : {ProbeKind::W1p, ProbeKind::Holder, ProbeKind::Lipschitz}) {
    const auto p = uniform_constant_probe(k, cst);
    CHECK(p.dispersion == doctest::Approx(1.0).epsilon(1e-6));
  }
  SweepConfig trig = trig_sweep();
  trig.params = {{"d", 2}};
  const auto lip = uniform_constant_probe(ProbeKind::Lipschitz, trig);
  CHECK(lip.constants.size() == 3);
  CHECK(lip.dispersion <= 3.0);
}
