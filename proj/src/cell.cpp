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

#include "homog/cell.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "homog/error.hpp"
#include "homog/linalg.hpp"

namespace homog {

namespace {

FluxOperator principal_operator(const SampledCoefficients& s) {
  SampledCoefficients p = SampledCoefficients::zeros(s.A.grid(), s.m);
  p.A = s.A;
  return FluxOperator(std::move(p), 0.0);
}

double relative_residual(const FluxOperator& op, const GridFunction& x, const GridFunction& rhs) {
  GridFunction r = op.apply(x, kPrincipal);
  GridFunction b = rhs;
  remove_mean(b);
  r -= b;
  const double bn = norm(b, NormSpec::Lp(2));
  return bn > 0.0 ? norm(r, NormSpec::Lp(2)) / bn : norm(r, NormSpec::Lp(2));
}

/// Solves the mean-zero cell problem for one column; returns m components.
GridFunction cell_solve(const FluxOperator& op, const GridFunction& rhs, const CellOptions& opts, std::vector<double>* residuals,
                        std::vector<int>* iterations) {
  GridFunction x(op.grid(), op.components());
  SolveOptions so;
  so.tol = opts.tol;
  so.max_iter = opts.max_iter;
  so.mean_zero = true;
  KrylovReport rep;
  if (rhs.max_abs() > 0.0) rep = solve_linear(op, rhs, x, so);
  remove_mean(x);
  if (residuals) residuals->push_back(rhs.max_abs() > 0.0 ? relative_residual(op, x, rhs) : 0.0);
  if (iterations) iterations->push_back(rep.iterations);
  return x;
}

double max_abs_mean(const GridFunction& u) {
  double worst = 0.0;
  for (double v : mean(u)) worst = std::max(worst, std::abs(v));
  return worst;
}

std::vector<double> offset(int d, int m, int k, int beta) {
  std::vector<double> g(static_cast<std::size_t>(m * d), 0.0);
  g[static_cast<std::size_t>(beta * d + k)] = 1.0;
  return g;
}

void require_torus(const Grid& g, int d) {
  require(g.periodic(), ErrorKind::InvalidArgument, "cell problems live on the torus grid");
  require(g.dim() == d, ErrorKind::DimensionMismatch, "torus dimension differs from the coefficient dimension");
}

}  // namespace

SampledCoefficients sample_cell(const CoefficientSet& cs, const Grid& torus) {
  require_torus(torus, cs.d);
  return sample_on(cs, torus, 1.0);
}

GridFunction solve_corrector_k(const CoefficientSet& cs, int k, const Grid& torus, const CellOptions& opts,
                               std::vector<double>* residuals, std::vector<int>* iterations) {
  require_torus(torus, cs.d);
  require(k >= 1 && k <= cs.d, ErrorKind::InvalidArgument, "corrector index k must lie in 1..d");
  require(opts.tol > 0.0, ErrorKind::InvalidArgument, "cell tolerance must be positive");
  const int d = cs.d, m = cs.m;
  const FluxOperator op = principal_operator(sample_cell(cs, torus));
  GridFunction chi(torus, m * m);
  for (int beta = 0; beta < m; ++beta) {
    // rhs = -L_1(P_k^beta) = div(A e_k e_beta) in flux form.
    const auto g = offset(d, m, k - 1, beta);
    GridFunction rhs(torus, m);
    GridFunction zero(torus, m);
    op.apply(zero.values().data(), rhs.values().data(), kPrincipal, g.data());
    rhs *= -1.0;
    const GridFunction col = cell_solve(op, rhs, opts, residuals, iterations);
    for (std::size_t p = 0; p < torus.size(); ++p)
      for (int gamma = 0; gamma < m; ++gamma) chi(p, gamma * m + beta) = col(p, gamma);
  }
  return chi;
}

GridFunction solve_corrector_0(const CoefficientSet& cs, const Grid& torus, const CellOptions& opts, std::vector<double>* residuals,
                               std::vector<int>* iterations) {
  require_torus(torus, cs.d);
  require(opts.tol > 0.0, ErrorKind::InvalidArgument, "cell tolerance must be positive");
  const int m = cs.m;
  const SampledCoefficients s = sample_cell(cs, torus);
  const FluxOperator full(s, 0.0);
  const FluxOperator op = principal_operator(s);
  GridFunction chi(torus, m * m);
  for (int beta = 0; beta < m; ++beta) {
    // rhs = div_h V e_beta = -(drift term applied to the constant e_beta).
    GridFunction e(torus, m);
    for (std::size_t p = 0; p < torus.size(); ++p) e(p, beta) = 1.0;
    GridFunction rhs = full.apply(e, kDrift);
    rhs *= -1.0;
    const GridFunction col = cell_solve(op, rhs, opts, residuals, iterations);
    for (std::size_t p = 0; p < torus.size(); ++p)
      for (int gamma = 0; gamma < m; ++gamma) chi(p, gamma * m + beta) = col(p, gamma);
  }
  return chi;
}

CorrectorSet solve_correctors(const CoefficientSet& cs, int n, const CellOptions& opts) {
  CorrectorSet out;
  out.grid = Grid::torus(cs.d, n);
  out.d = cs.d;
  out.m = cs.m;
  out.chi0 = solve_corrector_0(cs, out.grid, opts, &out.residuals, &out.iterations);
  out.max_mean = max_abs_mean(out.chi0);
  for (int k = 1; k <= cs.d; ++k) {
    out.chi.push_back(solve_corrector_k(cs, k, out.grid, opts, &out.residuals, &out.iterations));
    out.max_mean = std::max(out.max_mean, max_abs_mean(out.chi.back()));
  }
  return out;
}

namespace {

/// Column beta of a corrector as an m-component field.
GridFunction column(const GridFunction& chi, int m, int beta) {
  GridFunction col(chi.grid(), m);
  for (std::size_t p = 0; p < chi.grid().size(); ++p)
    for (int gamma = 0; gamma < m; ++gamma) col(p, gamma) = chi(p, gamma * m + beta);
  return col;
}

void symbol_range(HomogenizedCoefficients& h) {
  const int d = h.d, m = h.m, n = d * m;
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) M(i * m + a, j * m + b) = h.A_hat[static_cast<std::size_t>(((i * d + j) * m + a) * m + b)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  h.min_symbol = es.eigenvalues().minCoeff();
  h.max_symbol = es.eigenvalues().maxCoeff();
}

struct CellFluxes {
  // principal flux of chi_j^{.beta} + P_j^beta, indexed [j*m + beta], m*d comps each (alpha*d + i)
  std::vector<GridFunction> flux_k;
  // principal flux of chi_0^{.beta}, [beta]
  std::vector<GridFunction> flux_0;
  // B grad(chi_i^{.beta} + P_i^beta), [i*m + beta], m comps
  std::vector<GridFunction> adv_k;
  // B grad chi_0^{.beta}, [beta]
  std::vector<GridFunction> adv_0;
  SampledCoefficients samples;
};

CellFluxes cell_fluxes(const CoefficientSet& cs, const CorrectorSet& cor) {
  require(cor.d == cs.d && cor.m == cs.m && static_cast<int>(cor.chi.size()) == cs.d, ErrorKind::DimensionMismatch,
          "correctors do not match the coefficient set");
  require(cor.chi0.grid().same_shape(cor.grid), ErrorKind::DimensionMismatch, "correctors live on different grids");
  const int d = cs.d, m = cs.m;
  CellFluxes f;
  f.samples = sample_cell(cs, cor.grid);
  const FluxOperator op(f.samples, 0.0);
  for (int j = 0; j < d; ++j)
    for (int beta = 0; beta < m; ++beta) {
      const auto g = offset(d, m, j, beta);
      const GridFunction col = column(cor.chi[static_cast<std::size_t>(j)], m, beta);
      f.flux_k.push_back(op.principal_flux(col, g.data()));
      f.adv_k.push_back(op.advection(col, g.data()));
    }
  for (int beta = 0; beta < m; ++beta) {
    const GridFunction col = column(cor.chi0, m, beta);
    f.flux_0.push_back(op.principal_flux(col));
    f.adv_0.push_back(op.advection(col));
  }
  return f;
}

}  // namespace

HomogenizedCoefficients homogenize(const CoefficientSet& cs, const CorrectorSet& cor) {
  const CellFluxes f = cell_fluxes(cs, cor);
  const int d = cs.d, m = cs.m;
  HomogenizedCoefficients h;
  h.d = d;
  h.m = m;
  h.A_hat.assign(static_cast<std::size_t>(m * m * d * d), 0.0);
  h.V_hat.assign(static_cast<std::size_t>(m * m * d), 0.0);
  h.B_hat.assign(static_cast<std::size_t>(m * m * d), 0.0);
  h.c_hat.assign(static_cast<std::size_t>(m * m), 0.0);
  const std::vector<double> mV = mean(f.samples.V), mc = mean(f.samples.c);
  for (int j = 0; j < d; ++j)
    for (int beta = 0; beta < m; ++beta) {
      const auto fl = mean(f.flux_k[static_cast<std::size_t>(j * m + beta)]);
      const auto ad = mean(f.adv_k[static_cast<std::size_t>(j * m + beta)]);
      for (int i = 0; i < d; ++i)
        for (int a = 0; a < m; ++a) h.A_hat[static_cast<std::size_t>(((i * d + j) * m + a) * m + beta)] = fl[static_cast<std::size_t>(a * d + i)];
      // B_hat_j^{a beta} = mean of B grad(chi_j^{.beta} + P_j^beta), component a.
      for (int a = 0; a < m; ++a) h.B_hat[static_cast<std::size_t>((j * m + a) * m + beta)] = ad[static_cast<std::size_t>(a)];
    }
  for (int beta = 0; beta < m; ++beta) {
    const auto fl = mean(f.flux_0[static_cast<std::size_t>(beta)]);
    const auto ad = mean(f.adv_0[static_cast<std::size_t>(beta)]);
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < m; ++a) {
        const std::size_t k = static_cast<std::size_t>((i * m + a) * m + beta);
        h.V_hat[k] = mV[k] + fl[static_cast<std::size_t>(a * d + i)];
      }
    for (int a = 0; a < m; ++a) {
      const std::size_t k = static_cast<std::size_t>(a * m + beta);
      h.c_hat[k] = mc[k] + ad[static_cast<std::size_t>(a)];
    }
  }
  symbol_range(h);
  return h;
}

namespace {

double project_mean(GridFunction& u) {
  const double worst = max_abs_mean(u);
  remove_mean(u);
  return worst;
}

void check_solvability(double mean_value, const char* name) {
  if (mean_value > 1e-6) {
    std::ostringstream os;
    os << "solvability violation: cell average of " << name << " is " << mean_value
       << " (limit 1e-6); the correctors are inaccurate upstream";
    fail(ErrorKind::Solvability, os.str());
  }
}

/// Antisymmetric potential: out_{(k,i)} = D_k phi_i - D_i phi_k for a field with d*mm components (i*mm + ab).
GridFunction antisymmetric_potential(const GridFunction& phi, int d, int mm, int lead) {
  // phi components: (lead_index * d + i) * mm + ab with `lead` leading blocks.
  const GridFunction g = gradient(phi);  // component c*d + k
  GridFunction out(phi.grid(), lead * d * d * mm);
  for (std::size_t p = 0; p < phi.grid().size(); ++p)
    for (int t = 0; t < lead; ++t)
      for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
          for (int ab = 0; ab < mm; ++ab) {
            // E_{k i t}: D_k phi_{i t} - D_i phi_{k t}
            const int c_it = (i * lead + t) * mm + ab;
            const int c_kt = (k * lead + t) * mm + ab;
            out(p, ((k * d + i) * lead + t) * mm + ab) = g(p, c_it * d + k) - g(p, c_kt * d + i);
          }
  return out;
}

}  // namespace

void flux_correctors(const CoefficientSet& cs, const CorrectorSet& cor, const HomogenizedCoefficients& hats, FluxCorrectorSet& out,
                     double tol) {
  const CellFluxes f = cell_fluxes(cs, cor);
  const int d = cs.d, m = cs.m;
  const Grid& g = cor.grid;
  out.b = GridFunction(g, m * m * d * d);
  for (int j = 0; j < d; ++j)
    for (int gamma = 0; gamma < m; ++gamma) {
      const GridFunction& fl = f.flux_k[static_cast<std::size_t>(j * m + gamma)];
      for (std::size_t p = 0; p < g.size(); ++p)
        for (int i = 0; i < d; ++i)
          for (int a = 0; a < m; ++a) {
            const int k = ((i * d + j) * m + a) * m + gamma;
            out.b(p, k) = hats.A_hat[static_cast<std::size_t>(k)] - fl(p, a * d + i);
          }
    }
  out.mean_b = project_mean(out.b);
  check_solvability(out.mean_b, "b");
  out.pi = solve_periodic_poisson(out.b, tol);
  // b_ij has layout (i*d + j)*mm + ab: lead index i over d blocks, so E_lij = D_l pi_ij - D_i pi_lj.
  out.E = antisymmetric_potential(out.pi, d, m * m, d);
}

void lower_flux_correctors(const CoefficientSet& cs, const CorrectorSet& cor, const HomogenizedCoefficients& hats,
                           FluxCorrectorSet& out, double tol) {
  const CellFluxes f = cell_fluxes(cs, cor);
  const int d = cs.d, m = cs.m;
  const Grid& g = cor.grid;
  out.U = GridFunction(g, m * m * d);
  out.W = GridFunction(g, m * m * d);
  out.Z = GridFunction(g, m * m);
  for (int gamma = 0; gamma < m; ++gamma) {
    const GridFunction& fl = f.flux_0[static_cast<std::size_t>(gamma)];
    const GridFunction& ad = f.adv_0[static_cast<std::size_t>(gamma)];
    for (std::size_t p = 0; p < g.size(); ++p) {
      for (int i = 0; i < d; ++i)
        for (int a = 0; a < m; ++a) {
          const int k = (i * m + a) * m + gamma;
          out.U(p, k) = hats.V_hat[static_cast<std::size_t>(k)] - f.samples.V(p, k) - fl(p, a * d + i);
        }
      for (int a = 0; a < m; ++a) {
        const int k = a * m + gamma;
        out.Z(p, k) = hats.c_hat[static_cast<std::size_t>(k)] - f.samples.c(p, k) - ad(p, a);
      }
    }
    for (int i = 0; i < d; ++i) {
      // The advection field already contains B_i (from the P_i offset).
      const GridFunction& adk = f.adv_k[static_cast<std::size_t>(i * m + gamma)];
      for (std::size_t p = 0; p < g.size(); ++p)
        for (int a = 0; a < m; ++a) {
          const int k = (i * m + a) * m + gamma;
          out.W(p, k) = hats.B_hat[static_cast<std::size_t>(k)] - adk(p, a);
        }
    }
  }
  out.mean_U = project_mean(out.U);
  out.mean_W = project_mean(out.W);
  out.mean_Z = project_mean(out.Z);
  check_solvability(out.mean_U, "U");
  check_solvability(out.mean_W, "W");
  check_solvability(out.mean_Z, "Z");
  out.theta = solve_periodic_poisson(out.U, tol);
  out.F = antisymmetric_potential(out.theta, d, m * m, 1);
  out.vartheta = solve_periodic_poisson(out.W, tol);
  out.zeta = solve_periodic_poisson(out.Z, tol);
}

FluxCorrectorSet all_flux_correctors(const CoefficientSet& cs, const CorrectorSet& cor, const HomogenizedCoefficients& hats,
                                     double tol) {
  FluxCorrectorSet out;
  flux_correctors(cs, cor, hats, out, tol);
  lower_flux_correctors(cs, cor, hats, out, tol);
  return out;
}

FluxIdentityResiduals flux_identity_residuals(const FluxCorrectorSet& f, int d, int m) {
  FluxIdentityResiduals r;
  const int mm = m * m;
  const Grid& g = f.E.grid();
  for (std::size_t p = 0; p < g.size(); ++p) {
    for (int l = 0; l < d; ++l)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int ab = 0; ab < mm; ++ab)
            r.E_antisymmetry = std::max(r.E_antisymmetry, std::abs(f.E(p, ((l * d + i) * d + j) * mm + ab) + f.E(p, ((i * d + l) * d + j) * mm + ab)));
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int ab = 0; ab < mm; ++ab)
          r.F_antisymmetry = std::max(r.F_antisymmetry, std::abs(f.F(p, (k * d + i) * mm + ab) + f.F(p, (i * d + k) * mm + ab)));
  }
  const GridFunction gE = gradient(f.E);
  GridFunction divE(g, d * d * mm);
  for (std::size_t p = 0; p < g.size(); ++p)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int ab = 0; ab < mm; ++ab) {
          double s = 0.0;
          for (int l = 0; l < d; ++l) s += gE(p, (((l * d + i) * d + j) * mm + ab) * d + l);
          divE(p, (i * d + j) * mm + ab) = s - f.b(p, (i * d + j) * mm + ab);
        }
  r.div_E = norm(divE, NormSpec::Lp(2));
  const GridFunction gF = gradient(f.F);
  GridFunction divF(g, d * mm);
  for (std::size_t p = 0; p < g.size(); ++p)
    for (int i = 0; i < d; ++i)
      for (int ab = 0; ab < mm; ++ab) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += gF(p, ((k * d + i) * mm + ab) * d + k);
        divF(p, i * mm + ab) = s - f.U(p, i * mm + ab);
      }
  r.div_F = norm(divF, NormSpec::Lp(2));
  return r;
}

CellResult run_cell(const CoefficientSet& cs, int n, const CellOptions& opts) {
  CellResult r;
  r.correctors = solve_correctors(cs, n, opts);
  r.hats = homogenize(cs, r.correctors);
  return r;
}

}  // namespace homog
