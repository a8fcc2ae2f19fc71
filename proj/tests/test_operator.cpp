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

#include "homog/coefficients.hpp"
#include "homog/linalg.hpp"
#include "homog/operator.hpp"
#include "homog/rng.hpp"

using namespace homog;
using std::numbers::pi;

namespace {

GridFunction random_interior(const Grid& g, int m, Rng& rng) {
  GridFunction u(g, m);
  for (std::size_t p = 0; p < g.size(); ++p)
    if (!g.is_boundary(p))
      for (int a = 0; a < m; ++a) u(p, a) = rng.uniform(-1.0, 1.0);
  return u;
}

}  // namespace

TEST_CASE("operator: Laplacian eigenfunction") {
  const double lambda = 0.7;
  auto err = [&](int n) {
    const Grid b = Grid::unit_box(2, n);
    const FluxOperator op(SampledCoefficients::constant(b, 1, {1, 0, 0, 1}, {0, 0}, {0, 0}, {0}), lambda);
    const auto u = GridFunction::sample_scalar(b, [](const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); });
    const auto Lu = op.apply(u);
    double e = 0.0;
    for (std::size_t p = 0; p < b.size(); ++p)
      if (!b.is_boundary(p)) e = std::max(e, std::abs(Lu(p, 0) - (2 * pi * pi + lambda) * u(p, 0)));
    return e;
  };
  CHECK(err(16) < 0.5);
  CHECK(err(16) / err(32) == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("operator: zero coefficients give lambda times identity") {
  const Grid b = Grid::unit_box(2, 6);
  const FluxOperator op(SampledCoefficients::zeros(b, 2), 1.0);
  Rng rng(1, 0);
  const auto u = random_interior(b, 2, rng);
  const auto Lu = op.apply(u);
  for (std::size_t i = 0; i < u.values().size(); ++i) CHECK(Lu.values()[i] == u.values()[i]);
}

TEST_CASE("operator: adjoint assembly is the exact transpose") {
  for (const char* fam : {"trig", "system", "oscillating-potential"}) {
    CAPTURE(fam);
    nlohmann::json params = {{"d", 2}};
    if (std::string(fam) == "trig") params.update({{"v", 0.6}, {"b", 0.4}, {"c", 0.3}});
    if (std::string(fam) == "system") params.update({{"v", 0.5}, {"b", 0.3}, {"c", 0.2}});
    const CoefficientSet cs = builtin_family(fam, params);
    const Grid b = Grid::unit_box(2, 32);
    const SampledCoefficients s = sample_on(cs, b, 0.25);
    const FluxOperator op(s, 1.3);
    const FluxOperator adj = op.adjoint();
    Rng rng(7, 3);
    for (int k = 0; k < 20; ++k) {
      const auto u = random_interior(b, cs.m, rng), v = random_interior(b, cs.m, rng);
      const double lhs = inner(op.apply(u), v), rhs = inner(u, adj.apply(v));
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::sqrt(inner(u, u) * inner(v, v)) * 1e3);
    }
  }
}

TEST_CASE("operator: self-adjoint when V = B^T and A symmetric") {
  const CoefficientSet cs = builtin_family("oscillating-potential", {{"d", 2}, {"v", 1.0}});
  const Grid b = Grid::unit_box(2, 16);
  const FluxOperator op(sample_on(cs, b, 0.5), 2.0);
  CHECK(op.self_adjoint());
  Rng rng(2, 0);
  const auto u = random_interior(b, 1, rng), v = random_interior(b, 1, rng);
  CHECK(inner(op.apply(u), v) == doctest::Approx(inner(u, op.apply(v))).epsilon(1e-13));
}

TEST_CASE("linalg: periodic Poisson recovers a trigonometric potential") {
  const Grid t = Grid::torus(2, 32);
  const auto pot = GridFunction::sample_scalar(t, [](const Point& y) { return std::cos(2 * pi * y[0]) * std::sin(2 * pi * y[1]); });
  // Compact Laplacian applied to pot, then inverted.
  const FluxOperator lap(SampledCoefficients::constant(t, 1, {1, 0, 0, 1}, {0, 0}, {0, 0}, {0}), 0.0);
  GridFunction f = lap.apply(pot);
  f *= -1.0;
  const auto back = solve_periodic_poisson(f);
  double e = 0.0;
  for (std::size_t p = 0; p < t.size(); ++p) e = std::max(e, std::abs(back(p, 0) - pot(p, 0)));
  CHECK(e < 1e-9);
}
