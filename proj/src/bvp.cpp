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

#include "homog/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "homog/error.hpp"
#include "homog/rng.hpp"

namespace homog {

double estimate_lambda0(const CoefficientSet& cs) {
  require(cs.mu > 0.0, ErrorKind::InvalidArgument, "lambda0 needs a positive ellipticity constant");
  return cs.kappa + 2.0 * cs.kappa * cs.kappa / cs.mu;
}

double default_lambda(const CoefficientSet& cs) { return estimate_lambda0(cs) + 1.0; }

DirichletProblem make_problem(const CoefficientSet& cs, double eps, const Grid& grid) {
  require(!grid.periodic(), ErrorKind::InvalidArgument, "Dirichlet problems need a box grid");
  require(grid.dim() == cs.d, ErrorKind::DimensionMismatch, "grid dimension differs from the coefficient dimension");
  DirichletProblem pb;
  pb.cs = cs;
  pb.eps = eps;
  pb.lambda = default_lambda(cs);
  pb.grid = grid;
  pb.f = GridFunction(grid, cs.m * cs.d);
  pb.F = GridFunction(grid, cs.m);
  pb.g = GridFunction(grid, cs.m);
  return pb;
}

namespace {

SampledCoefficients problem_samples(const DirichletProblem& pb) {
  require(!pb.grid.periodic(), ErrorKind::InvalidArgument, "Dirichlet problems need a box grid");
  require(pb.eps > 0.0, ErrorKind::InvalidArgument, "eps must be positive");
  if (!pb.lambda_override) {
    const double l0 = estimate_lambda0(pb.cs);
    if (pb.lambda < l0 - 1e-12 * std::max(1.0, l0)) {
      std::ostringstream os;
      os << "lambda = " << pb.lambda << " is below lambda0 = " << l0 << "; raise lambda or set the override flag";
      fail(ErrorKind::InvalidArgument, os.str());
    }
  }
  SampleOptions so;
  so.min_points_per_period = 16.0;
  so.override_guard = pb.guard_override;
  return sample_on(pb.cs, pb.grid, pb.eps, so);
}

bool present(const GridFunction& u) { return u.size() > 0; }

}  // namespace

FluxOperator assemble(const DirichletProblem& pb) { return FluxOperator(problem_samples(pb), pb.lambda); }

FluxOperator assemble_adjoint(const DirichletProblem& pb) { return FluxOperator(problem_samples(pb).transposed(), pb.lambda); }

GridFunction load_vector(const DirichletProblem& pb) {
  const Grid& g = pb.grid;
  const int d = g.dim(), m = pb.cs.m;
  GridFunction rhs(g, m);
  if (present(pb.F)) {
    require(pb.F.grid().same_shape(g) && pb.F.components() == m, ErrorKind::DimensionMismatch, "load F does not match the problem");
  }
  if (present(pb.f)) {
    require(pb.f.grid().same_shape(g) && pb.f.components() == m * d, ErrorKind::DimensionMismatch,
            "divergence source f needs m*d components on the problem grid");
  }
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g.is_boundary(p)) continue;
    for (int a = 0; a < m; ++a) {
      double v = present(pb.F) ? pb.F(p, a) : 0.0;
      if (present(pb.f))
        for (int i = 0; i < d; ++i)
          v += (pb.f(g.neighbor(p, i, 1), a * d + i) - pb.f(g.neighbor(p, i, -1), a * d + i)) / (2.0 * g.spacing(i));
      rhs(p, a) = v;
    }
  }
  return rhs;
}

namespace {

BvpSolution run_solve(const DirichletProblem& pb, const FluxOperator& op, const BvpOptions& opts, const GridFunction* initial) {
  const Grid& g = pb.grid;
  const int m = pb.cs.m;
  const GridFunction rhs = load_vector(pb);
  GridFunction x(g, m);
  if (initial) {
    require(initial->grid().same_shape(g) && initial->components() == m, ErrorKind::DimensionMismatch, "initial guess does not match");
    x = *initial;
  }
  if (present(pb.g)) {
    require(pb.g.grid().same_shape(g) && pb.g.components() == m, ErrorKind::DimensionMismatch, "boundary data g does not match");
  }
  for (std::size_t p = 0; p < g.size(); ++p)
    if (g.is_boundary(p))
      for (int a = 0; a < m; ++a) x(p, a) = present(pb.g) ? pb.g(p, a) : 0.0;
  SolveOptions so;
  so.tol = opts.tol;
  so.max_iter = opts.max_iter;
  so.force_nonsymmetric = opts.force_nonsymmetric;
  BvpSolution sol;
  try {
    sol.report = solve_linear(op, rhs, x, so);
  } catch (const SolverError& e) {
    if (pb.lambda_override) {
      throw SolverError(std::string(e.what()) + " [lambda below lambda0 by override; coercivity is not guaranteed]", e.residual(),
                        e.iterations());
    }
    throw;
  }
  GridFunction r = op.apply(x);
  r -= rhs;
  r *= -1.0;
  // Normalize by the lifted load rhs - L(g), the right-hand side the Krylov solve sees.
  GridFunction lift(g, m);
  for (std::size_t p = 0; p < g.size(); ++p)
    if (g.is_boundary(p))
      for (int a = 0; a < m; ++a) lift(p, a) = x(p, a);
  GridFunction b = op.apply(lift);
  b -= rhs;
  double rn = 0.0, bn = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g.is_boundary(p)) continue;
    for (int a = 0; a < m; ++a) {
      rn += r(p, a) * r(p, a);
      bn += b(p, a) * b(p, a);
    }
  }
  sol.residual = bn > 0.0 ? std::sqrt(rn / bn) : std::sqrt(rn);
  sol.u = std::move(x);
  return sol;
}

}  // namespace

BvpSolution solve(const DirichletProblem& pb, const BvpOptions& opts, const GridFunction* initial) {
  return run_solve(pb, assemble(pb), opts, initial);
}

BvpSolution solve_adjoint(const DirichletProblem& pb, const BvpOptions& opts) { return run_solve(pb, assemble_adjoint(pb), opts, nullptr); }

CoefficientSet homogenized_set(const HomogenizedCoefficients& h) {
  CoefficientSet cs = constant_set(h.d, h.m, h.A_hat, h.V_hat, h.B_hat, h.c_hat);
  cs.family = "constant";
  return cs;
}

BvpSolution solve_homogenized(const HomogenizedCoefficients& hats, double lambda, const Grid& grid, const GridFunction& f,
                              const GridFunction& F, const GridFunction& g, const BvpOptions& opts, bool lambda_override) {
  DirichletProblem pb = make_problem(homogenized_set(hats), 1.0, grid);
  pb.lambda = lambda;
  pb.lambda_override = lambda_override;
  if (present(f)) pb.f = f;
  if (present(F)) pb.F = F;
  if (present(g)) pb.g = g;
  return solve(pb, opts);
}

double bilinear(const FluxOperator& op, const GridFunction& u, const GridFunction& v) { return inner(op.apply(u), v); }

CoercivityReport coercivity_battery(const CoefficientSet& cs, double eps, const Grid& grid, double lambda, int samples,
                                    std::uint64_t seed, std::uint64_t stream) {
  DirichletProblem pb = make_problem(cs, eps, grid);
  pb.lambda = lambda;
  pb.lambda_override = true;
  const FluxOperator op = assemble(pb);
  const int d = grid.dim(), m = cs.m;
  CoercivityReport rep;
  rep.lambda = lambda;
  rep.c0 = 0.5 * cs.mu * std::min(1.0, 1.0 / (1.0 + grid.diameter() * grid.diameter()));
  rep.samples = samples;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  Rng rng(seed, stream);
  for (int s = 0; s < samples; ++s) {
    GridFunction u(grid, m);
    if (s % 2 == 0) {
      // Rough: independent uniform values at interior points.
      for (std::size_t p = 0; p < grid.size(); ++p)
        if (!grid.is_boundary(p))
          for (int a = 0; a < m; ++a) u(p, a) = rng.uniform(-1.0, 1.0);
    } else {
      // Smooth: random combination of the lowest sine modes.
      constexpr int kModes = 4;
      int total = 1;
      for (int k = 0; k < d; ++k) total *= kModes;
      std::vector<double> amp(static_cast<std::size_t>(total * m));
      for (double& a : amp) a = rng.uniform(-1.0, 1.0);
      for (std::size_t p = 0; p < grid.size(); ++p) {
        const Point x = grid.coords(p);
        for (int t = 0; t < total; ++t) {
          double phi = 1.0;
          int r = t;
          for (int k = 0; k < d; ++k) {
            phi *= std::sin(std::numbers::pi * (r % kModes + 1) * x[k] / grid.extent(k));
            r /= kModes;
          }
          for (int a = 0; a < m; ++a) u(p, a) += amp[static_cast<std::size_t>(t * m + a)] * phi;
        }
        if (grid.is_boundary(p))
          for (int a = 0; a < m; ++a) u(p, a) = 0.0;
      }
    }
    const double form = bilinear(op, u, u);
    const double h1 = h1_norm(u);
    const double ratio = form / (h1 * h1);
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    if (!(ratio >= rep.c0)) ++rep.violations;
  }
  return rep;
}

CoercivityReport coercive_lambda(const CoefficientSet& cs, double eps, const Grid& grid, int samples, std::uint64_t seed) {
  double lambda = estimate_lambda0(cs);
  CoercivityReport rep = coercivity_battery(cs, eps, grid, lambda, samples, seed);
  int escalations = 0;
  while (rep.violations > 0 && escalations < 8) {
    lambda = lambda > 0.0 ? 2.0 * lambda : 1.0;
    ++escalations;
    rep = coercivity_battery(cs, eps, grid, lambda, samples, seed);
  }
  rep.escalations = escalations;
  return rep;
}

double boundedness_bound(const CoefficientSet& cs, const Grid& grid, double lambda) {
  const int d = cs.d, m = cs.m;
  std::vector<double> A(static_cast<std::size_t>(m * m * d * d));
  double amax = 0.0;
  constexpr int n = 16;
  const int total = static_cast<int>(std::pow(n, d));
  for (int s = 0; s < total; ++s) {
    Point y{0.0, 0.0, 0.0};
    int r = s;
    for (int k = d - 1; k >= 0; --k) {
      y[k] = static_cast<double>(r % n) / n;
      r /= n;
    }
    cs.A(y, A.data());
    double f = 0.0;
    for (double v : A) f += v * v;
    amax = std::max(amax, std::sqrt(f));
  }
  double inv = 0.0;
  for (int k = 0; k < d; ++k) inv += 1.0 / (grid.extent(k) * grid.extent(k));
  const double cp = 1.0 / (std::numbers::pi * std::numbers::pi * inv);
  return (amax + 2.0 * cs.kappa + std::abs(lambda)) * (1.0 + cp);
}

double caccioppoli_ratio(const GridFunction& u, const Point& x, double r) {
  const Grid& g = u.grid();
  const GridFunction gu = gradient(u);
  double num = 0.0, den = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Point y = g.coords(p);
    double d2 = 0.0;
    for (int k = 0; k < g.dim(); ++k) d2 += (y[k] - x[k]) * (y[k] - x[k]);
    const double w = g.weight(p);
    if (d2 <= r * r)
      for (int c = 0; c < gu.components(); ++c) num += w * gu(p, c) * gu(p, c);
    if (d2 <= 4.0 * r * r)
      for (int c = 0; c < u.components(); ++c) den += w * u(p, c) * u(p, c);
  }
  return den > 0.0 ? r * std::sqrt(num / den) : 0.0;
}

}  // namespace homog
