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

#include "homog/cell.hpp"
#include "homog/coefficients.hpp"
#include "homog/grid.hpp"
#include "homog/linalg.hpp"
#include "homog/operator.hpp"

namespace homog {

/// L_eps u = div(f) + F in the box, u = g on the boundary.
/// f has m*d components (alpha*d + i), F and g have m.
struct DirichletProblem {
  CoefficientSet cs;
  double eps = 1.0;
  double lambda = 0.0;
  Grid grid;
  GridFunction f, F, g;
  bool lambda_override = false;  ///< accept lambda below lambda0
  bool guard_override = false;   ///< skip the h <= eps/16 resolution guard
};

struct BvpOptions {
  double tol = 1e-10;  ///< relative residual
  int max_iter = 0;    ///< 0: 50 * cells
  bool force_nonsymmetric = false;
};

struct BvpSolution {
  GridFunction u;
  KrylovReport report;
  double residual = 0.0;  ///< recomputed ||rhs - L u|| / ||rhs - L g|| on interior rows
};

/// lambda0 = kappa + 2 kappa^2 / mu.
double estimate_lambda0(const CoefficientSet& cs);
/// Default zero-order constant: lambda0 + 1.
double default_lambda(const CoefficientSet& cs);

/// Problem with zero data on `grid` and the default lambda.
DirichletProblem make_problem(const CoefficientSet& cs, double eps, const Grid& grid);

/// Forward and adjoint discrete operators, boundary rows zero.
FluxOperator assemble(const DirichletProblem& pb);
FluxOperator assemble_adjoint(const DirichletProblem& pb);

/// Interior right-hand side F + D^c_i f_i (zero on the boundary).
GridFunction load_vector(const DirichletProblem& pb);

BvpSolution solve(const DirichletProblem& pb, const BvpOptions& opts = {}, const GridFunction* initial = nullptr);
BvpSolution solve_adjoint(const DirichletProblem& pb, const BvpOptions& opts = {});

/// Constant-coefficient problem with the homogenized tensors.
CoefficientSet homogenized_set(const HomogenizedCoefficients& hats);
BvpSolution solve_homogenized(const HomogenizedCoefficients& hats, double lambda, const Grid& grid, const GridFunction& f,
                              const GridFunction& F, const GridFunction& g, const BvpOptions& opts = {}, bool lambda_override = false);

/// Discrete bilinear form B[u, v] = <L u, v> with trapezoid weights.
double bilinear(const FluxOperator& op, const GridFunction& u, const GridFunction& v);

struct CoercivityReport {
  double lambda = 0.0;
  double c0 = 0.0;            ///< mu/2 * min(1, 1/(1 + diam^2))
  double min_ratio = 0.0;     ///< min over the battery of B[u,u] / ||u||_{H1}^2
  int samples = 0;
  int violations = 0;
  int escalations = 0;        ///< lambda doublings applied
};

/// Random interior u drawn from stream `stream` of `seed`; reports B[u,u] >= c0 ||u||^2_{H1}.
CoercivityReport coercivity_battery(const CoefficientSet& cs, double eps, const Grid& grid, double lambda, int samples,
                                    std::uint64_t seed, std::uint64_t stream = 0);
/// Runs the battery at lambda0 and doubles lambda until it passes (at most 8 times).
CoercivityReport coercive_lambda(const CoefficientSet& cs, double eps, const Grid& grid, int samples, std::uint64_t seed);

/// Upper bound (||A||_inf + 2 kappa + lambda)(1 + C_P) for |B[u,v]| / (||u||_{H1} ||v||_{H1}),
/// with the box Poincare constant C_P = 1 / (pi^2 sum_k 1/L_k^2).
double boundedness_bound(const CoefficientSet& cs, const Grid& grid, double lambda);

/// Caccioppoli ratio r ||grad u||_{L2(B_r)} / ||u||_{L2(B_2r)} for the ball centred at x.
double caccioppoli_ratio(const GridFunction& u, const Point& x, double r);

}  // namespace homog
