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

#include "homog/dirichlet.hpp"
#include "homog/error.hpp"

using namespace homog;

TEST_CASE("dirichlet: constant coefficients reproduce I and P_k") {
  const CoefficientSet cs = builtin_family("constant", {{"d", 2}, {"m", 2}, {"a", 1.0}, {"v", 0.4}});
  const Grid b = Grid::unit_box(2, 16);
  const auto s = solve_dirichlet_correctors(cs, 0.25, b);
  CHECK(phi0_deviation(s) <= 1e-9);
  CHECK(phik_deviation(s, 1) <= 1e-9);
  CHECK(phik_deviation(s, 2) <= 1e-9);
  const CorrectorSet cor = solve_correctors(cs, 4);
  const auto diag = psi_diagnostics(s, cor);
  for (double v : diag.sup) CHECK(v <= 1e-9);
}

TEST_CASE("dirichlet: zero drift gives the identity") {
  const CoefficientSet cs = builtin_family("trig", {{"d", 2}});
  const Grid b = Grid::unit_box(2, 64);
  const auto phi0 = solve_phi0(cs, 0.25, b);
  double worst = 0.0;
  for (std::size_t p = 0; p < b.size(); ++p) worst = std::max(worst, std::abs(phi0(p, 0) - 1.0));
  CHECK(worst <= 1e-9);
}

TEST_CASE("dirichlet: boundary traces are exact") {
  const CoefficientSet cs = builtin_family("oscillating-potential", {{"d", 2}, {"v", 1.0}});
  const Grid b = Grid::unit_box(2, 64);
  const auto s = solve_dirichlet_correctors(cs, 0.25, b);
  for (std::size_t p = 0; p < b.size(); ++p) {
    if (!b.is_boundary(p)) continue;
    CHECK(s.phi0(p, 0) == 1.0);
    CHECK(s.phi[0](p, 0) == b.coords(p)[0]);
    CHECK(s.phi[1](p, 0) == b.coords(p)[1]);
  }
  for (double r : s.residuals) CHECK(r <= 1e-9);
  const CorrectorSet cor = solve_correctors(cs, 16);
  const auto diag = psi_diagnostics(s, cor);
  CHECK(diag.boundary_defect == 0.0);
  CHECK(diag.sup[0] > 0.0);
}

TEST_CASE("dirichlet: laminate deviation scales with eps") {
  const CoefficientSet cs = builtin_family("laminate", {{"d", 2}});
  std::vector<double> scaled;
  for (double eps : {0.25, 0.125}) {
    const Grid b = Grid::unit_box(2, static_cast<int>(16 / eps));
    const auto s = solve_dirichlet_correctors(cs, eps, b);
    scaled.push_back(phik_deviation(s, 1) / eps);
  }
  CHECK(scaled[0] / scaled[1] <= 2.0);
  CHECK(scaled[1] / scaled[0] <= 2.0);
}

TEST_CASE("dirichlet: incommensurable grids are rejected") {
  const Grid b = Grid::unit_box(2, 100);
  CHECK(commensurate_period(b, 0.25) == 25);
  CHECK_THROWS_AS(commensurate_period(b, 1.0 / 3.0), Error);
  const CoefficientSet cs = builtin_family("trig", {{"d", 2}});
  const CorrectorSet cor = solve_correctors(cs, 16);
  CHECK_THROWS_AS(periodic_pullback(cor.chi[0], b, 0.25), Error);
}

TEST_CASE("dirichlet: pointwise inverse of phi0") {
  const Grid b = Grid::unit_box(2, 4);
  GridFunction phi(b, 4);
  for (std::size_t p = 0; p < b.size(); ++p) {
    phi(p, 0) = 1.1;
    phi(p, 1) = 0.2;
    phi(p, 2) = -0.1;
    phi(p, 3) = 0.9;
  }
  const auto inv = phi0_inverse(phi, 2);
  const double det = 1.1 * 0.9 + 0.02;
  CHECK(inv(3, 0) == doctest::Approx(0.9 / det));
  CHECK(inv(3, 1) == doctest::Approx(-0.2 / det));
  phi(5, 0) = 1.6;
  CHECK_THROWS_AS(phi0_inverse(phi, 2), Error);
}

TEST_CASE("dirichlet: Psi gradient follows the eps/d_x envelope") {
  const CoefficientSet cs = builtin_family("trig", {{"d", 2}, {"v", 0.5}, {"b", 0.5}, {"c", 0.5}});
  const double eps = 0.0625;
  const auto s = solve_dirichlet_correctors(cs, eps, Grid::unit_box(2, 256));
  const auto diag = psi_diagnostics(s, solve_correctors(cs, 16));
  for (int k = 1; k <= 2; ++k) {
    CHECK(diag.envelope_dispersion[static_cast<std::size_t>(k)] <= 3.0);
    CHECK(diag.interior_sup[static_cast<std::size_t>(k)] <= diag.sup[static_cast<std::size_t>(k)]);
  }
}
