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

#include <vector>

#include "homog/cell.hpp"
#include "homog/coefficients.hpp"
#include "homog/grid.hpp"

namespace homog {

/// Dirichlet correctors of the principal operator -div(A(x/eps) grad) on a box.
/// Every field carries m*m components gamma*m + beta (column beta).
struct DirichletCorrectorSet {
  Grid grid;
  double eps = 1.0;
  int d = 0, m = 0;
  GridFunction phi0;              ///< = I on the boundary
  std::vector<GridFunction> phi;  ///< phi[k-1] = P_k on the boundary
  std::vector<double> residuals;  ///< per column solve: phi0 columns, then phi_k columns
  std::vector<int> iterations;
};

struct DirichletOptions {
  double tol = 1e-10;
  int max_iter = 0;
  bool guard_override = false;  ///< skip the h <= eps/16 guard
};

/// -div(A_eps grad Phi0) = div(V_eps), Phi0 = I on the boundary. The zero-order
/// constant of the full operator plays no role here.
GridFunction solve_phi0(const CoefficientSet& cs, double eps, const Grid& box, const DirichletOptions& opts = {},
                        std::vector<double>* residuals = nullptr, std::vector<int>* iterations = nullptr);
/// -div(A_eps grad Phi_k) = 0, Phi_k^beta = P_k^beta = x_k e_beta on the boundary; k is 1-based.
GridFunction solve_phik(const CoefficientSet& cs, double eps, int k, const Grid& box, const DirichletOptions& opts = {},
                        std::vector<double>* residuals = nullptr, std::vector<int>* iterations = nullptr);
DirichletCorrectorSet solve_dirichlet_correctors(const CoefficientSet& cs, double eps, const Grid& box, const DirichletOptions& opts = {});

/// ||Phi0 - I||_inf and ||Phi_k - P_k||_inf (k 1-based).
double phi0_deviation(const DirichletCorrectorSet& s);
double phik_deviation(const DirichletCorrectorSet& s, int k);

/// Cell period in box grid steps, eps / h. Throws InvalidArgument unless it is
/// the same integer on every axis.
int commensurate_period(const Grid& box, double eps);
/// Pullback f(x/eps) of a torus field onto a box by exact index wrap; the torus
/// must have eps/h points per axis.
GridFunction periodic_pullback(const GridFunction& cell, const Grid& box, double eps);

struct PsiBin {
  double lo = 0.0, hi = 0.0;  ///< d_x range [lo, hi)
  double max_grad = 0.0;      ///< max |grad Psi| over the bin
  int count = 0;
};

/// Psi_0 = Phi0 - I - eps chi0(x/eps) and Psi_k = Phi_k - P_k - eps chi_k(x/eps).
/// Vectors are indexed by k = 0..d.
struct PsiDiagnostics {
  std::vector<GridFunction> psi;
  std::vector<double> sup;                 ///< ||Psi_k||_inf
  std::vector<double> grad_sup;            ///< ||grad Psi_k||_inf
  std::vector<double> interior_sup;        ///< ||Psi_k||_inf over d_x >= 1/4
  std::vector<std::vector<PsiBin>> profile;  ///< dyadic d_x bins starting at [0, h)
  /// C in |grad Psi| <= C min(1, eps/d_x): max over bins of max_grad / min(1, eps / d_mid).
  std::vector<double> envelope_constant;
  /// max/min of the same ratio over the decay bins (lo >= eps), where the envelope is eps/d_x.
  std::vector<double> envelope_dispersion;
  double boundary_defect = 0.0;            ///< max |Psi_k + eps chi_k(x/eps)| on the boundary
};
PsiDiagnostics psi_diagnostics(const DirichletCorrectorSet& phis, const CorrectorSet& correctors);

/// Pointwise inverse of Phi0 (m*m blocks). Requires ||Phi0 - I||_inf <= 1/2.
GridFunction phi0_inverse(const GridFunction& phi0, int m);

}  // namespace homog
