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
#include <vector>

#include "homog/bvp.hpp"
#include "homog/grid.hpp"

namespace homog {

struct GreenOptions {
  double tol = 1e-10;
  int max_iter = 0;
  /// Solve with the forward operator instead, giving the Green matrix of the adjoint.
  bool forward = false;
};

/// Mollified Green matrix G_rho(., y). columns[gamma] solves L* G = (1/|B_rho(y)|) 1_{B_rho(y)} e_gamma
/// with zero boundary values; its component alpha holds G^{alpha gamma}(x, y).
struct GreenSample {
  Point y{0.0, 0.0, 0.0};
  std::size_t y_index = 0;
  double rho = 0.0;
  double eps = 1.0;
  double lambda = 0.0;
  bool forward = false;
  std::vector<GridFunction> columns;
  std::vector<double> residuals;
};

/// Normalized ball indicator: sum_p w_p s(p) = 1 over interior points within rho of y.
GridFunction ball_source(const Grid& grid, const Point& y, double rho);

/// pb supplies the coefficients, eps, lambda and grid; its data fields are ignored.
/// Requires rho >= 2h and y an interior grid point.
GreenSample approx_green(const DirichletProblem& pb, std::size_t y_index, double rho, const GreenOptions& opts = {});

/// m*m block (alpha*m + gamma) of the ball average of the columns around x, the
/// discrete counterpart of G(x, y).
std::vector<double> ball_average(const GreenSample& s, const Point& x, double rho);

/// sum_alpha <F^alpha, G^{alpha gamma}(., y)> for every gamma: the representation of u^gamma(y).
std::vector<double> represent(const GreenSample& s, const GridFunction& F);

struct ReciprocityReport {
  double max_abs_diff = 0.0;
  double scale = 0.0;     ///< max |G| entry
  double relative = 0.0;  ///< max_abs_diff / scale
};
/// Compares G(x, y) (adjoint solves at y) with the transpose of the adjoint-operator
/// Green matrix at (y, x) (forward solves at x). For self-adjoint problems both are G.
ReciprocityReport reciprocity(const DirichletProblem& pb, std::size_t x_index, std::size_t y_index, double rho,
                              const GreenOptions& opts = {});

struct DecayPair {
  double r = 0.0, g = 0.0, dx = 0.0, dy = 0.0;
};
struct DecayFit {
  std::vector<DecayPair> pairs;
  double exponent = 0.0;   ///< slope of log|G| against log r
  double prefactor = 0.0;  ///< exp(intercept)
  double residual = 0.0;   ///< rms of the log-log residuals
  double decades = 0.0;    ///< log10(r_max / r_min)
};
/// Least-squares fit over pairs with 4h <= r <= d_y/2 and rho < r/4; |G| is the Frobenius norm
/// of the m*m block. Needs d = 3 and at least 10 pairs.
DecayFit decay_fit(const GreenSample& s);

/// max over interior x with r >= max(4h, 4 rho) of |G| r^{d-1} / d_y.
double boundary_weighted_ratio(const GreenSample& s);

/// Boundary representation u^gamma(y) = int_{dOmega} P^{alpha gamma}(x, y) g^alpha(x) dS with
/// P^{alpha gamma} = -n_i n_j a_ji^{beta alpha} d_n G^{beta gamma}, the normal derivative by the
/// second-order one-sided difference, trapezoid weights on every face. `g` is read on boundary points.
std::vector<double> poisson_kernel_boundary_rep(const DirichletProblem& pb, const GreenSample& s, const GridFunction& g);

/// Boundary data battery: trigonometric traces and localized bumps, at least 10 entries.
std::vector<GridFunction> boundary_battery(const Grid& grid, int m, int count, std::uint64_t seed);

struct MaximalProbe {
  double cp = 0.0;         ///< max over the battery of ||(u)*||_{L^p(dOmega)} / ||g||_{L^p(dOmega)}
  double max_ratio = 0.0;  ///< max over the battery of ||u||_inf / ||g||_inf
  int widened = 0;
  int solves = 0;
};
MaximalProbe maximal_function_probe(const DirichletProblem& pb, const std::vector<GridFunction>& battery, double p, double N0 = 2.0,
                                    const BvpOptions& opts = {});

}  // namespace homog
