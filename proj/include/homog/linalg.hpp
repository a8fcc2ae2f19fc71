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

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "homog/grid.hpp"
#include "homog/operator.hpp"

namespace homog {

using LinearMap = std::function<void(const double* in, double* out)>;
using Projector = std::function<void(double* x)>;

struct KrylovReport {
  int iterations = 0;
  double residual = 0.0;  ///< final relative residual ||b - Ax|| / ||b||
  bool converged = false;
  std::string method;
};

/// Preconditioned conjugate gradients. `project` (may be empty) is applied to
/// every search direction and residual to keep iterates in a subspace.
KrylovReport pcg(std::size_t n, const LinearMap& A, const LinearMap& M, const Projector& project, const double* b, double* x,
                 double tol, int max_iter);

/// Right-preconditioned BiCGStab with restart on breakdown.
KrylovReport bicgstab(std::size_t n, const LinearMap& A, const LinearMap& M, const Projector& project, const double* b, double* x,
                      double tol, int max_iter);

/// Exact inverse of s_alpha(-Delta_h) + sigma on the active points of a grid,
/// applied by sine transforms on boxes and real DFTs on the torus (the zero
/// mode is dropped when sigma = 0).
class SpectralPreconditioner {
 public:
  SpectralPreconditioner(const Grid& grid, std::vector<double> scale, double sigma);
  ~SpectralPreconditioner();
  SpectralPreconditioner(const SpectralPreconditioner&) = delete;
  SpectralPreconditioner& operator=(const SpectralPreconditioner&) = delete;

  /// in/out hold `scale.size()` components per grid point.
  void apply(const double* in, double* out) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 0;          ///< 0 selects the module default
  bool mean_zero = false;    ///< torus: solve in the per-component mean-zero subspace
  bool force_nonsymmetric = false;
};

/// Solves L x = rhs on the active points. On a box the boundary entries of
/// `x` are kept as Dirichlet data; the interior entries of `x` are the
/// initial guess. Throws SolverError when the cap is reached.
KrylovReport solve_linear(const FluxOperator& op, const GridFunction& rhs, GridFunction& x, const SolveOptions& opts);

/// Removes the per-component mean (uniform weights) in place.
void remove_mean(GridFunction& u);

/// Solves Delta_h pi = f on the torus with zero mean, per component.
GridFunction solve_periodic_poisson(const GridFunction& f, double tol = 1e-12);

}  // namespace homog
