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
#include <numbers>

#include "homog/cell.hpp"
#include "homog/coefficients.hpp"

using namespace homog;
using std::numbers::pi;

TEST_CASE("cell: constant coefficients need no correction") {
  const CoefficientSet cs = builtin_family("constant", {{"d", 2}, {"m", 2}, {"a", 1.0}, {"v", 0.3}, {"b", -0.2}, {"c", 0.5}});
  const CellResult r = run_cell(cs, 8);
  CHECK(r.correctors.chi0.max_abs() <= 1e-12);
  for (const auto& chi : r.correctors.chi) CHECK(chi.max_abs() <= 1e-12);
  std::vector<double> A(16), V(8), B(8), c(4);
  cs.evaluate({0, 0, 0}, A.data(), V.data(), B.data(), c.data());
  for (std::size_t i = 0; i < A.size(); ++i) CHECK(r.hats.A_hat[i] == doctest::Approx(A[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < V.size(); ++i) CHECK(r.hats.V_hat[i] == doctest::Approx(V[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < B.size(); ++i) CHECK(r.hats.B_hat[i] == doctest::Approx(B[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(r.hats.c_hat[i] == doctest::Approx(c[i]).epsilon(1e-12));
  const auto fx = all_flux_correctors(cs, r.correctors, r.hats);
  CHECK(fx.b.max_abs() <= 1e-12);
  CHECK(fx.E.max_abs() <= 1e-12);
  CHECK(fx.U.max_abs() <= 1e-12);
  CHECK(fx.W.max_abs() <= 1e-12);
  CHECK(fx.Z.max_abs() <= 1e-12);
}

TEST_CASE("cell: 1D corrector matches the closed-form antiderivative") {
  const CoefficientSet cs = builtin_family("laminate", {{"d", 1}});
  auto err = [&](int n) {
    const Grid t = Grid::torus(1, n);
    const GridFunction chi = solve_corrector_k(cs, 1, t);
    // chi' = a_hat / a - 1 = (2 + cos)/2 - 1 = cos(2 pi y) / 2, so chi = sin(2 pi y) / (4 pi).
    double e = 0.0;
    for (std::size_t p = 0; p < t.size(); ++p) e = std::max(e, std::abs(chi(p, 0) - std::sin(2 * pi * t.coords(p)[0]) / (4 * pi)));
    return e;
  };
  CHECK(err(64) < 1e-3);
  CHECK(err(64) / err(128) == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("cell: laminate correctors separate") {
  const CoefficientSet cs = builtin_family("laminate", {{"d", 2}});
  const CorrectorSet cor = solve_correctors(cs, 32);
  const Grid& t = cor.grid;
  CHECK(cor.chi[1].max_abs() <= 1e-9);
  for (int i = 0; i < 32; ++i)
    for (int j = 1; j < 32; ++j) CHECK(cor.chi[0](t.flat({i, j, 0}), 0) == doctest::Approx(cor.chi[0](t.flat({i, 0, 0}), 0)).scale(1e-9));
  CHECK(cor.max_mean <= 1e-10);
}

TEST_CASE("cell: chi0 for a gradient drift") {
  const double v = 0.8;
  const CoefficientSet cs = builtin_family("oscillating-potential", {{"d", 2}, {"v", v}});
  auto err = [&](int n) {
    const Grid t = Grid::torus(2, n);
    std::vector<double> res;
    const GridFunction chi0 = solve_corrector_0(cs, t, {}, &res);
    for (double r : res) CHECK(r <= 1e-10);
    double e = 0.0;
    for (std::size_t p = 0; p < t.size(); ++p) {
      const Point y = t.coords(p);
      const double pot = v * (std::sin(2 * pi * y[0]) + std::sin(2 * pi * y[1])) / (2 * pi);
      e = std::max(e, std::abs(chi0(p, 0) + pot));
    }
    return e;
  };
  CHECK(err(32) < 1e-2);
  CHECK(err(32) / err(64) == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("cell: homogenized coefficients of laminates") {
  const CoefficientSet cs = builtin_family("laminate", {{"d", 1}});
  const CellResult r = run_cell(cs, 512);
  CHECK(r.hats.A_hat[0] == doctest::Approx(0.5).epsilon(2e-4));
}

TEST_CASE("cell: flux corrector identities") {
  const CoefficientSet cs = builtin_family("trig", {{"d", 2}, {"v", 0.5}, {"b", 0.4}, {"c", 0.3}});
  auto run = [&](int n) {
    const CellResult r = run_cell(cs, n);
    const auto fx = all_flux_correctors(cs, r.correctors, r.hats);
    CHECK(std::abs(fx.mean_b) <= 1e-8);
    CHECK(std::abs(fx.mean_U) <= 1e-8);
    CHECK(std::abs(fx.mean_W) <= 1e-8);
    CHECK(std::abs(fx.mean_Z) <= 1e-8);
    return flux_identity_residuals(fx, cs.d, cs.m);
  };
  const auto coarse = run(32), fine = run(64);
  CHECK(coarse.E_antisymmetry == 0.0);
  CHECK(coarse.F_antisymmetry == 0.0);
  CHECK(coarse.div_E / fine.div_E == doctest::Approx(4.0).epsilon(0.3));
  CHECK(coarse.div_F / fine.div_F == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("cell: homogenized tensor stays elliptic") {
  for (const auto& name : builtin_family_names()) {
    CAPTURE(name);
    const CoefficientSet cs = builtin_family(name, {{"d", 2}});
    const CellResult r = run_cell(cs, 32);
    CHECK(r.hats.ellipticity_margin(cs.mu) >= -1e-8);
  }
}
