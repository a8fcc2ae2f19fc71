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
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "homog/bvp.hpp"
#include "homog/dirichlet.hpp"

namespace homog {

/// Ordinary least squares on (log eps, log error). Non-positive errors are dropped and counted.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< rms of the log residuals
  int used = 0;
  int dropped = 0;
};
/// Throws InvalidArgument when fewer than 3 usable pairs remain.
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs);

/// w = u_eps - Phi0 u - (Phi_k - P_k) d_k u.
struct ExpansionError {
  GridFunction w;
  double h1 = 0.0;           ///< global discrete H1 norm
  double h1_interior = 0.0;  ///< H1 norm over d_x >= 1/8 (corners and faces excluded)
  double l2 = 0.0;
  double phi0_term_l2 = 0.0;  ///< ||(Phi0 - I) u||_{L2}
  double phik_term_l2 = 0.0;  ///< ||(Phi_k - P_k) d_k u||_{L2}
  double boundary_max = 0.0;  ///< max |w| on the boundary
};
/// `grad_u` (m*d components, beta*d + k) may be supplied from a finer grid; otherwise it is
/// computed from u.
ExpansionError expansion_error(const GridFunction& u_eps, const GridFunction& u, const DirichletCorrectorSet& phis,
                               const GridFunction* grad_u = nullptr);

enum class LoadKind { One, Sine, Bump };
LoadKind parse_load(const std::string& name);
std::string load_name(LoadKind kind);
/// F = 1, sin(pi x_1) sin(pi x_2) (product over the axes), or a Gaussian bump at the centre; every component.
GridFunction make_load(const Grid& grid, int m, LoadKind kind);

struct SweepConfig {
  std::string family = "trig";
  nlohmann::json params = nlohmann::json::object();
  std::vector<double> eps{0.125, 0.0625, 0.03125};  ///< strictly decreasing, dyadic
  double points_per_period = 16.0;                  ///< grid rule h = eps / points_per_period
  int fixed_cells = 0;                              ///< > 0: every eps on this one grid instead
  int cell_n = 0;                                   ///< torus resolution; 0 selects points_per_period
  bool lambda_default = true;                       ///< lambda0 + 1
  double lambda = 0.0;                              ///< used when lambda_default is false
  LoadKind load = LoadKind::One;
  double tol = 1e-10;
  bool correctors = true;  ///< also compute the expansion error rows
  std::uint64_t seed = 0;  ///< drives the maximal-function battery
  int threads = 1;
};

struct SweepRow {
  double eps = 0.0, h = 0.0;
  int cells = 0;
  double l2 = 0.0;            ///< ||u_eps - u||_{L2}
  double linf = 0.0;          ///< ||u_eps - u||_{L^inf}
  double h1 = 0.0;            ///< uncorrected ||u_eps - u||_{H1}
  double h1_interior = 0.0;   ///< uncorrected, d_x >= 1/8
  double w_h1 = 0.0, w_h1_interior = 0.0, w_l2 = 0.0;
  double phi0_term_l2 = 0.0, phik_term_l2 = 0.0;
  double triangle_slack = 0.0;  ///< w_l2 + term norms - l2, nonnegative up to rounding
  double w_boundary = 0.0;
  int iterations = 0;
  double wall_seconds = 0.0;
};

struct ConvergenceReport {
  SweepConfig config;
  std::vector<SweepRow> rows;
  HomogenizedCoefficients hats;
  double lambda = 0.0;
  int fine_cells = 0;
  double work = 0.0;  ///< sum of points x solves
  bool work_warning = false;
  bool complete = true;
  std::string failure;
  /// Fits with fewer than 3 rows or zero errors are left unset.
  bool has_rates = false;
  RateFit l2_rate, linf_rate, h1_rate, w_rate;
  bool dropped_largest = false;  ///< the largest eps was dropped from the L2 fit
};

/// Validates eps (positive, strictly decreasing, dyadic) and the grid rule; throws Config errors.
void validate_sweep(const SweepConfig& cfg);
/// Runs the sweep. Sub-solve failures stop the sweep with `complete = false` and the rows so far.
ConvergenceReport run_sweep(const SweepConfig& cfg);

/// Deterministic CSV of the rows (full precision).
void write_report_csv(std::ostream& os, const ConvergenceReport& r);
nlohmann::json report_json(const ConvergenceReport& r);
/// Static log-log plot of the L2 and corrected H1 rows with a slope-1 reference.
void write_rate_svg(std::ostream& os, const ConvergenceReport& r);

enum class ProbeKind { W1p, Holder, Lipschitz, MaxPrinciple };
ProbeKind parse_probe(const std::string& name);
std::string probe_name(ProbeKind kind);

struct ProbeResult {
  ProbeKind kind = ProbeKind::W1p;
  std::vector<double> eps;
  std::vector<double> constants;  ///< left side / right side of the cited estimate
  double dispersion = 0.0;        ///< max / min
};
/// Same data across eps. W1p uses p = 4 (||grad u||_4 / ||F||_4), Holder sigma = 1/2
/// ([u]_{1/2} / ||F||_inf), Lipschitz ||grad u||_inf / ||F||_inf, MaxPrinciple the L2 maximal
/// function constant of the boundary battery (seeded by cfg.seed).
ProbeResult uniform_constant_probe(ProbeKind kind, const SweepConfig& cfg);

}  // namespace homog
