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

#include "homog/dirichlet.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "homog/error.hpp"
#include "homog/linalg.hpp"

namespace homog {

namespace {

void require_box(const CoefficientSet& cs, const Grid& box, double eps) {
  require(!box.periodic(), ErrorKind::InvalidArgument, "Dirichlet correctors live on a box grid");
  require(box.dim() == cs.d, ErrorKind::DimensionMismatch, "grid dimension differs from the coefficient dimension");
  require(eps > 0.0, ErrorKind::InvalidArgument, "eps must be positive");
}

SampledCoefficients box_samples(const CoefficientSet& cs, double eps, const Grid& box, const DirichletOptions& opts) {
  SampleOptions so;
  so.min_points_per_period = 16.0;
  so.override_guard = opts.guard_override;
  return sample_on(cs, box, eps, so);
}

FluxOperator principal_only(const SampledCoefficients& s) {
  SampledCoefficients p = SampledCoefficients::zeros(s.A.grid(), s.m);
  p.A = s.A;
  return FluxOperator(std::move(p), 0.0);
}

double interior_residual(const FluxOperator& op, const GridFunction& x, const GridFunction& rhs) {
  const Grid& g = op.grid();
  const GridFunction r = op.apply(x, kPrincipal);
  double rn = 0.0, bn = 0.0, xn = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g.is_boundary(p)) continue;
    for (int a = 0; a < x.components(); ++a) {
      const double e = r(p, a) - rhs(p, a);
      rn += e * e;
      bn += rhs(p, a) * rhs(p, a);
      xn += x(p, a) * x(p, a);
    }
  }
  // Zero-source columns are scaled by the solution instead.
  const double scale = bn > 0.0 ? bn : std::max(xn, 1e-300);
  return std::sqrt(rn / scale);
}

/// Solves one column with Dirichlet data `x` on the boundary; returns x.
GridFunction column_solve(const FluxOperator& op, const GridFunction& rhs, GridFunction x, const DirichletOptions& opts,
                          std::vector<double>* residuals, std::vector<int>* iterations) {
  SolveOptions so;
  so.tol = opts.tol;
  so.max_iter = opts.max_iter;
  const KrylovReport rep = solve_linear(op, rhs, x, so);
  if (residuals) residuals->push_back(interior_residual(op, x, rhs));
  if (iterations) iterations->push_back(rep.iterations);
  return x;
}

void store_column(GridFunction& phi, const GridFunction& col, int m, int beta) {
  for (std::size_t p = 0; p < phi.grid().size(); ++p)
    for (int gamma = 0; gamma < m; ++gamma) phi(p, gamma * m + beta) = col(p, gamma);
}

}  // namespace

GridFunction solve_phi0(const CoefficientSet& cs, double eps, const Grid& box, const DirichletOptions& opts,
                        std::vector<double>* residuals, std::vector<int>* iterations) {
  require_box(cs, box, eps);
  const int m = cs.m;
  const SampledCoefficients s = box_samples(cs, eps, box, opts);
  const FluxOperator full(s, 0.0);
  const FluxOperator op = principal_only(s);
  GridFunction phi(box, m * m);
  for (int beta = 0; beta < m; ++beta) {
    GridFunction e(box, m);
    for (std::size_t p = 0; p < box.size(); ++p) e(p, beta) = 1.0;
    // div_h(V_eps e_beta) is minus the drift term applied to the constant column.
    GridFunction rhs = full.apply(e, kDrift);
    rhs *= -1.0;
    GridFunction x(box, m);
    for (std::size_t p = 0; p < box.size(); ++p)
      if (box.is_boundary(p)) x(p, beta) = 1.0;
    store_column(phi, column_solve(op, rhs, std::move(x), opts, residuals, iterations), m, beta);
  }
  return phi;
}

GridFunction solve_phik(const CoefficientSet& cs, double eps, int k, const Grid& box, const DirichletOptions& opts,
                        std::vector<double>* residuals, std::vector<int>* iterations) {
  require_box(cs, box, eps);
  require(k >= 1 && k <= cs.d, ErrorKind::InvalidArgument, "corrector index k must lie in 1..d");
  const int m = cs.m;
  const FluxOperator op = principal_only(box_samples(cs, eps, box, opts));
  GridFunction phi(box, m * m);
  const GridFunction rhs(box, m);
  for (int beta = 0; beta < m; ++beta) {
    GridFunction x(box, m);
    for (std::size_t p = 0; p < box.size(); ++p)
      if (box.is_boundary(p)) x(p, beta) = box.coords(p)[static_cast<std::size_t>(k - 1)];
    store_column(phi, column_solve(op, rhs, std::move(x), opts, residuals, iterations), m, beta);
  }
  return phi;
}

DirichletCorrectorSet solve_dirichlet_correctors(const CoefficientSet& cs, double eps, const Grid& box, const DirichletOptions& opts) {
  DirichletCorrectorSet s;
  s.grid = box;
  s.eps = eps;
  s.d = cs.d;
  s.m = cs.m;
  s.phi0 = solve_phi0(cs, eps, box, opts, &s.residuals, &s.iterations);
  for (int k = 1; k <= cs.d; ++k) s.phi.push_back(solve_phik(cs, eps, k, box, opts, &s.residuals, &s.iterations));
  return s;
}

double phi0_deviation(const DirichletCorrectorSet& s) {
  double worst = 0.0;
  for (std::size_t p = 0; p < s.grid.size(); ++p)
    for (int g = 0; g < s.m; ++g)
      for (int b = 0; b < s.m; ++b) worst = std::max(worst, std::abs(s.phi0(p, g * s.m + b) - (g == b ? 1.0 : 0.0)));
  return worst;
}

double phik_deviation(const DirichletCorrectorSet& s, int k) {
  require(k >= 1 && k <= s.d, ErrorKind::InvalidArgument, "corrector index k must lie in 1..d");
  const GridFunction& phi = s.phi[static_cast<std::size_t>(k - 1)];
  double worst = 0.0;
  for (std::size_t p = 0; p < s.grid.size(); ++p) {
    const double xk = s.grid.coords(p)[static_cast<std::size_t>(k - 1)];
    for (int g = 0; g < s.m; ++g)
      for (int b = 0; b < s.m; ++b) worst = std::max(worst, std::abs(phi(p, g * s.m + b) - (g == b ? xk : 0.0)));
  }
  return worst;
}

int commensurate_period(const Grid& box, double eps) {
  require(!box.periodic(), ErrorKind::InvalidArgument, "commensurability is defined for box grids");
  int period = 0;
  for (int k = 0; k < box.dim(); ++k) {
    const double ratio = eps / box.spacing(k);
    const double r = std::round(ratio);
    if (std::abs(ratio - r) > 1e-9 * std::max(1.0, ratio) || r < 1.0 || (period != 0 && static_cast<int>(r) != period)) {
      std::ostringstream os;
      os << "grid incommensurable with eps: eps/h = " << ratio << " on axis " << k << " must be one integer on every axis";
      fail(ErrorKind::InvalidArgument, os.str());
    }
    period = static_cast<int>(r);
  }
  return period;
}

GridFunction periodic_pullback(const GridFunction& cell, const Grid& box, double eps) {
  const Grid& t = cell.grid();
  require(t.periodic() && t.dim() == box.dim(), ErrorKind::DimensionMismatch, "pullback needs a torus field of the box dimension");
  const int P = commensurate_period(box, eps);
  require(t.points(0) == P, ErrorKind::InvalidArgument,
          "torus resolution " + std::to_string(t.points(0)) + " differs from eps/h = " + std::to_string(P));
  const int nc = cell.components();
  GridFunction out(box, nc);
  for (std::size_t p = 0; p < box.size(); ++p) {
    Index i = box.index(p);
    for (int k = 0; k < box.dim(); ++k) i[static_cast<std::size_t>(k)] %= P;
    const std::size_t q = t.flat(i);
    for (int c = 0; c < nc; ++c) out(p, c) = cell(q, c);
  }
  return out;
}

PsiDiagnostics psi_diagnostics(const DirichletCorrectorSet& phis, const CorrectorSet& cor) {
  require(cor.d == phis.d && cor.m == phis.m, ErrorKind::DimensionMismatch, "cell and Dirichlet correctors differ in shape");
  const Grid& box = phis.grid;
  const int d = phis.d, m = phis.m, mm = m * m;
  const double eps = phis.eps, h = box.max_spacing();
  PsiDiagnostics out;
  for (int k = 0; k <= d; ++k) {
    const GridFunction& phi = k == 0 ? phis.phi0 : phis.phi[static_cast<std::size_t>(k - 1)];
    const GridFunction& chi = k == 0 ? cor.chi0 : cor.chi[static_cast<std::size_t>(k - 1)];
    GridFunction echi = periodic_pullback(chi, box, eps);
    echi *= eps;
    GridFunction psi(box, mm);
    for (std::size_t p = 0; p < box.size(); ++p) {
      const double base = k == 0 ? 1.0 : box.coords(p)[static_cast<std::size_t>(k - 1)];
      for (int g = 0; g < m; ++g)
        for (int b = 0; b < m; ++b) {
          const int c = g * m + b;
          psi(p, c) = phi(p, c) - (g == b ? base : 0.0) - echi(p, c);
        }
    }
    const GridFunction grad = gradient(psi);
    double sup = 0.0, gsup = 0.0, isup = 0.0, defect = 0.0;
    const double dmax = 0.5 * box.extent(0);
    std::vector<PsiBin> bins{{0.0, h, 0.0, 0}};
    while (bins.back().hi < dmax) bins.push_back({bins.back().hi, 2.0 * bins.back().hi, 0.0, 0});
    for (std::size_t p = 0; p < box.size(); ++p) {
      double mag = 0.0, gmag = 0.0;
      for (int c = 0; c < mm; ++c) mag = std::max(mag, std::abs(psi(p, c)));
      for (int c = 0; c < mm * d; ++c) gmag += grad(p, c) * grad(p, c);
      gmag = std::sqrt(gmag);
      sup = std::max(sup, mag);
      gsup = std::max(gsup, gmag);
      const double dx = box.boundary_distance(p);
      if (dx >= 0.25) isup = std::max(isup, mag);
      if (box.is_boundary(p))
        for (int c = 0; c < mm; ++c) defect = std::max(defect, std::abs(psi(p, c) + echi(p, c)));
      for (auto& bin : bins)
        if (dx >= bin.lo && dx < bin.hi) {
          bin.max_grad = std::max(bin.max_grad, gmag);
          ++bin.count;
          break;
        }
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, cmax = 0.0;
    for (const auto& bin : bins) {
      if (bin.count == 0) continue;
      const double mid = bin.lo > 0.0 ? std::sqrt(bin.lo * bin.hi) : 0.5 * bin.hi;
      const double ratio = bin.max_grad / std::min(1.0, eps / mid);
      cmax = std::max(cmax, ratio);
      if (bin.lo < eps * (1.0 - 1e-12)) continue;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    out.psi.push_back(std::move(psi));
    out.sup.push_back(sup);
    out.grad_sup.push_back(gsup);
    out.interior_sup.push_back(isup);
    out.profile.push_back(std::move(bins));
    out.envelope_constant.push_back(cmax);
    out.envelope_dispersion.push_back(hi == 0.0 ? 1.0 : (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()));
    out.boundary_defect = std::max(out.boundary_defect, defect);
  }
  return out;
}

GridFunction phi0_inverse(const GridFunction& phi0, int m) {
  require(phi0.components() == m * m, ErrorKind::DimensionMismatch, "phi0 needs m*m components");
  const Grid& g = phi0.grid();
  GridFunction inv(g, m * m);
  Eigen::MatrixXd M(m, m);
  for (std::size_t p = 0; p < g.size(); ++p) {
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        M(a, b) = phi0(p, a * m + b);
        require(std::abs(M(a, b) - (a == b ? 1.0 : 0.0)) <= 0.5, ErrorKind::InvalidArgument,
                "phi0 is too far from the identity to invert (||phi0 - I||_inf > 1/2)");
      }
    const Eigen::MatrixXd Mi = M.inverse();
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) inv(p, a * m + b) = Mi(a, b);
  }
  return inv;
}

}  // namespace homog
