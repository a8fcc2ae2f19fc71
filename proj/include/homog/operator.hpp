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

#include <cstddef>
#include <vector>

#include "homog/grid.hpp"

namespace homog {

/// Coefficient samples on one grid. Component layouts:
///   A: ((i*d + j)*m + alpha)*m + beta
///   V, B: (i*m + alpha)*m + beta
///   c: alpha*m + beta
struct SampledCoefficients {
  int d = 0;
  int m = 0;
  GridFunction A, V, B, c;

  /// Zero coefficients of the right shapes on `grid`.
  static SampledCoefficients zeros(const Grid& grid, int m);
  /// Constant coefficients broadcast over `grid`; vectors use the layouts above.
  static SampledCoefficients constant(const Grid& grid, int m, const std::vector<double>& A, const std::vector<double>& V,
                                      const std::vector<double>& B, const std::vector<double>& c);
  /// Coefficients of the adjoint operator: A'_ij^ab = A_ji^ba, V' = B^T, B' = V^T, c' = c^T.
  SampledCoefficients transposed() const;
  bool all_finite() const;
};

/// Terms of L u = -div(A grad u + V u) + B grad u + (c + lambda) u.
enum Term : unsigned {
  kPrincipal = 1u,
  kDrift = 2u,     ///< -div(V u)
  kAdvection = 4u, ///< B grad u
  kReaction = 8u,  ///< (c + lambda) u
  kAllTerms = 15u,
};

/// Flux-form finite-difference operator. Diagonal diffusion and the V, B
/// terms live on half points with arithmetic-averaged coefficients; mixed
/// second derivatives use centered differences at nodes. The forward and
/// adjoint assemblies are exact transposes on functions vanishing on the
/// box boundary. Box boundary rows are returned as zero.
class FluxOperator {
 public:
  FluxOperator(SampledCoefficients coeffs, double lambda);

  const Grid& grid() const noexcept { return grid_; }
  int components() const noexcept { return m_; }
  double lambda() const noexcept { return lambda_; }
  const SampledCoefficients& coefficients() const noexcept { return coeffs_; }
  /// True when the operator equals its adjoint (A symmetric, V = B^T, c = c^T).
  bool self_adjoint() const noexcept { return self_adjoint_; }

  /// out = L(u + G.x) restricted to `terms`, where the affine offset has
  /// constant gradient `grad_offset[beta*d + k]` (may be null). The offset
  /// enters the principal and B terms only.
  void apply(const double* u, double* out, unsigned terms = kAllTerms, const double* grad_offset = nullptr) const;
  GridFunction apply(const GridFunction& u, unsigned terms = kAllTerms) const;

  /// Node-averaged principal flux (A grad(u + G.x))_i^alpha stored at alpha*d + i (torus only).
  GridFunction principal_flux(const GridFunction& u, const double* grad_offset = nullptr) const;
  /// Node value of B grad(u + G.x), m components (torus only).
  GridFunction advection(const GridFunction& u, const double* grad_offset = nullptr) const;

  FluxOperator adjoint() const;

  /// Per-component mean diagonal diffusion, used to scale the preconditioner.
  std::vector<double> diffusion_scale() const;
  /// Mean diagonal of c + lambda, clipped at zero.
  double reaction_shift() const;

  /// Active points: every point on the torus, interior points on a box.
  const std::vector<std::size_t>& active() const noexcept { return active_; }

 private:
  Grid grid_;
  SampledCoefficients coeffs_;
  int d_ = 0, m_ = 0;
  double lambda_ = 0.0;
  bool self_adjoint_ = false;
  bool has_cross_ = false, has_V_ = false, has_B_ = false, has_c_ = false;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> plus_[3], minus_[3];
  // Half-point averages at p + e_i/2, m*m blocks per point.
  std::vector<double> abar_[3], vbar_[3], bbar_[3];
};

}  // namespace homog
