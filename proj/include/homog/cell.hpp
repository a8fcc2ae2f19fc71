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

#include "homog/coefficients.hpp"
#include "homog/grid.hpp"

namespace homog {

struct CellOptions {
  double tol = 1e-10;  ///< relative residual
  int max_iter = 0;    ///< 0: 20 * n^{d/2}
};

/// Periodic correctors on the torus. chi0 and every chi[k] carry m*m
/// components indexed gamma*m + beta (column beta, row gamma).
struct CorrectorSet {
  Grid grid;
  int d = 0, m = 0;
  GridFunction chi0;
  std::vector<GridFunction> chi;
  std::vector<double> residuals;  ///< relative residual per solve: chi0 columns first, then chi_k columns
  std::vector<int> iterations;
  double max_mean = 0.0;          ///< largest |cell average| over all corrector components
};

/// Constant coefficients of the homogenized operator; layouts as SampledCoefficients.
struct HomogenizedCoefficients {
  int d = 0, m = 0;
  std::vector<double> A_hat, V_hat, B_hat, c_hat;
  double min_symbol = 0.0;   ///< smallest eigenvalue of the symmetric part of A_hat
  double max_symbol = 0.0;
  double ellipticity_margin(double mu) const { return min_symbol - mu; }
};

/// Flux and auxiliary correctors. Layouts:
///   b_ij: ((i*d + j)*m + alpha)*m + gamma           (as A)
///   E_lij: ((l*d + i)*d + j)*m*m + alpha*m + gamma
///   U_i, theta_i, W_i, vartheta_i: (i*m + alpha)*m + gamma
///   F_ki: ((k*d + i)*m + alpha)*m + gamma
///   Z, zeta: alpha*m + gamma
struct FluxCorrectorSet {
  GridFunction b, pi, E;
  GridFunction U, theta, F;
  GridFunction W, vartheta, Z, zeta;
  /// Cell averages before projection, the solvability conditions.
  double mean_b = 0.0, mean_U = 0.0, mean_W = 0.0, mean_Z = 0.0;
};

/// Principal-part samples of the coefficients on the torus (eps = 1).
SampledCoefficients sample_cell(const CoefficientSet& cs, const Grid& torus);

/// Solves L_1(chi_k^beta + P_k^beta) = 0 for every beta; k is 1-based.
GridFunction solve_corrector_k(const CoefficientSet& cs, int k, const Grid& torus, const CellOptions& opts = {},
                               std::vector<double>* residuals = nullptr, std::vector<int>* iterations = nullptr);
/// Solves L_1(chi_0) = div(V) column by column.
GridFunction solve_corrector_0(const CoefficientSet& cs, const Grid& torus, const CellOptions& opts = {},
                               std::vector<double>* residuals = nullptr, std::vector<int>* iterations = nullptr);
CorrectorSet solve_correctors(const CoefficientSet& cs, int n, const CellOptions& opts = {});

/// Cell averages of the four integrands, with fluxes taken in the same
/// discrete form as the cell operator so the solvability conditions hold exactly.
HomogenizedCoefficients homogenize(const CoefficientSet& cs, const CorrectorSet& correctors);

/// b_ij and E_lij = D_l pi_ij - D_i pi_lj with Delta pi_ij = b_ij.
void flux_correctors(const CoefficientSet& cs, const CorrectorSet& correctors, const HomogenizedCoefficients& hats,
                     FluxCorrectorSet& out, double tol = 1e-12);
/// U, theta, F and the auxiliary W, vartheta, Z, zeta.
void lower_flux_correctors(const CoefficientSet& cs, const CorrectorSet& correctors, const HomogenizedCoefficients& hats,
                           FluxCorrectorSet& out, double tol = 1e-12);
FluxCorrectorSet all_flux_correctors(const CoefficientSet& cs, const CorrectorSet& correctors, const HomogenizedCoefficients& hats,
                                     double tol = 1e-12);

struct FluxIdentityResiduals {
  double E_antisymmetry = 0.0;  ///< max |E_lij + E_ilj|
  double F_antisymmetry = 0.0;  ///< max |F_ki + F_ik|
  double div_E = 0.0;           ///< ||D_l E_lij - b_ij||_{L2(Y)}
  double div_F = 0.0;           ///< ||D_k F_ki - U_i||_{L2(Y)}
};
FluxIdentityResiduals flux_identity_residuals(const FluxCorrectorSet& f, int d, int m);

/// Solves the homogenized-coefficient pipeline on an n-point torus.
struct CellResult {
  CorrectorSet correctors;
  HomogenizedCoefficients hats;
};
CellResult run_cell(const CoefficientSet& cs, int n, const CellOptions& opts = {});

}  // namespace homog
