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
#include <string>
#include <vector>

#include <json.hpp>

#include "homog/grid.hpp"
#include "homog/operator.hpp"

namespace homog {

/// Pointwise evaluator: writes the coefficient block at cell coordinate y.
using CoefficientField = std::function<void(const Point& y, double* out)>;

/// Periodic coefficient tuple (A, V, B, c) with the constants of the
/// ellipticity, boundedness and regularity conditions. Layouts follow
/// SampledCoefficients.
struct CoefficientSet {
  int d = 0;
  int m = 0;
  std::string family;
  nlohmann::json params;
  CoefficientField A, V, B, c;

  double mu = 0.0;        ///< lower ellipticity bound (minimum symmetric-part eigenvalue)
  double mu_upper = 0.0;  ///< largest symmetric-part eigenvalue, informational
  double kappa = 0.0;     ///< lattice sup of |V|, |B|, |c| (Frobenius)
  double tau = 1.0;       ///< Holder exponent of the family
  double lambda = 0.0;    ///< zero-order shift; set by callers
  bool symmetric = false; ///< family declares a_ij^ab = a_ji^ba
  bool has_lower_order = false;

  /// Evaluates every block at y; sizes m*m*d*d, m*m*d, m*m*d, m*m.
  void evaluate(const Point& y, double* A_out, double* V_out, double* B_out, double* c_out) const;
};

/// Names of the built-in families.
std::vector<std::string> builtin_family_names();

/// Builds a built-in family. `params` holds the family parameters plus "d"
/// (default 2) and, for families that allow it, "m". Throws
/// Error(InvalidArgument) on a parameter range violation.
CoefficientSet builtin_family(const std::string& name, const nlohmann::json& params);

/// Minimum over a lattice of n_probe^d cell points and all unit xi of
/// a(y) xi.xi - mu |xi|^2, using the declared mu.
double check_ellipticity(const CoefficientSet& cs, int n_probe);

struct CoefficientValidation {
  bool ok = true;
  double ellipticity_margin = 0.0;
  double periodicity_defect = 0.0;  ///< max |f(y + e_k) - f(y)| over the lattice
  double bound_excess = 0.0;        ///< max(0, sup|V,B,c| - kappa)
  double symmetry_defect = 0.0;     ///< max |a_ij^ab - a_ji^ba| when symmetric is declared
  std::vector<std::string> problems;
};

/// Checks ellipticity, periodicity, boundedness and the symmetry flag on a
/// 16-per-axis lattice.
CoefficientValidation validate(const CoefficientSet& cs);

/// Lattice (64 per axis) estimates of mu, the upper symbol bound and kappa.
void estimate_constants(CoefficientSet& cs, int lattice = 64);

struct SampleOptions {
  /// Minimum points per period required on box grids (h <= eps / min_points_per_period).
  double min_points_per_period = 8.0;
  /// Disables the resolution guard; the caller takes responsibility.
  bool override_guard = false;
};

/// Samples A(x/eps), V(x/eps), B(x/eps), c(x/eps) on a grid. When eps/h is
/// an integer P along an axis the cell coordinate is (i mod P)/P exactly.
SampledCoefficients sample_on(const CoefficientSet& cs, const Grid& grid, double eps, const SampleOptions& opts = {});

/// Constant-coefficient set from explicit blocks (used for the homogenized operator).
CoefficientSet constant_set(int d, int m, std::vector<double> A, std::vector<double> V, std::vector<double> B,
                            std::vector<double> c);

}  // namespace homog
