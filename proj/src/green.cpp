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

#include "homog/green.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "homog/error.hpp"
#include "homog/linalg.hpp"
#include "homog/rng.hpp"

namespace homog {

namespace {

double distance(const Point& a, const Point& b, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

double frobenius(const std::vector<double>& block) {
  double s = 0.0;
  for (double v : block) s += v * v;
  return std::sqrt(s);
}

}  // namespace

GridFunction ball_source(const Grid& grid, const Point& y, double rho) {
  GridFunction s(grid, 1);
  double mass = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (grid.is_boundary(p) || distance(grid.coords(p), y, grid.dim()) > rho * (1.0 + 1e-12)) continue;
    s(p, 0) = 1.0;
    mass += grid.weight(p);
  }
  require(mass > 0.0, ErrorKind::InvalidArgument, "mollification ball contains no interior grid point");
  s *= 1.0 / mass;
  return s;
}

GreenSample approx_green(const DirichletProblem& pb, std::size_t y_index, double rho, const GreenOptions& opts) {
  const Grid& g = pb.grid;
  require(y_index < g.size(), ErrorKind::InvalidArgument, "source index out of range");
  require(!g.is_boundary(y_index), ErrorKind::InvalidArgument, "the source point y must be interior");
  require(rho >= 2.0 * g.max_spacing() * (1.0 - 1e-12), ErrorKind::InvalidArgument,
          "mollification radius rho must be at least 2h");
  const int m = pb.cs.m;
  GreenSample s;
  s.y = g.coords(y_index);
  s.y_index = y_index;
  s.rho = rho;
  s.eps = pb.eps;
  s.lambda = pb.lambda;
  s.forward = opts.forward;
  const GridFunction ball = ball_source(g, s.y, rho);
  BvpOptions bo;
  bo.tol = opts.tol;
  bo.max_iter = opts.max_iter;
  const FluxOperator op = opts.forward ? assemble(pb) : assemble_adjoint(pb);
  for (int gamma = 0; gamma < m; ++gamma) {
    DirichletProblem col = pb;
    col.f = GridFunction();
    col.g = GridFunction();
    col.F = GridFunction(g, m);
    for (std::size_t p = 0; p < g.size(); ++p) col.F(p, gamma) = ball(p, 0);
    GridFunction x(g, m);
    SolveOptions so;
    so.tol = opts.tol;
    so.max_iter = opts.max_iter;
    const GridFunction rhs = load_vector(col);
    solve_linear(op, rhs, x, so);
    GridFunction r = op.apply(x);
    r -= rhs;
    s.residuals.push_back(norm(r, NormSpec::Lp(2)) / norm(rhs, NormSpec::Lp(2)));
    s.columns.push_back(std::move(x));
  }
  return s;
}

std::vector<double> ball_average(const GreenSample& s, const Point& x, double rho) {
  require(!s.columns.empty(), ErrorKind::InvalidArgument, "empty Green sample");
  const Grid& g = s.columns.front().grid();
  const int m = static_cast<int>(s.columns.size());
  const GridFunction ball = ball_source(g, x, rho);
  std::vector<double> out(static_cast<std::size_t>(m * m), 0.0);
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (ball(p, 0) == 0.0) continue;
    const double w = g.weight(p) * ball(p, 0);
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < m; ++c) out[static_cast<std::size_t>(a * m + c)] += w * s.columns[static_cast<std::size_t>(c)](p, a);
  }
  return out;
}

std::vector<double> represent(const GreenSample& s, const GridFunction& F) {
  const int m = static_cast<int>(s.columns.size());
  require(F.components() == m && F.grid().same_shape(s.columns.front().grid()), ErrorKind::DimensionMismatch,
          "load does not match the Green sample");
  std::vector<double> out;
  for (int c = 0; c < m; ++c) out.push_back(inner(F, s.columns[static_cast<std::size_t>(c)]));
  return out;
}

ReciprocityReport reciprocity(const DirichletProblem& pb, std::size_t x_index, std::size_t y_index, double rho, const GreenOptions& opts) {
  GreenOptions adj = opts, fwd = opts;
  adj.forward = false;
  fwd.forward = true;
  const GreenSample gy = approx_green(pb, y_index, rho, adj);
  const GreenSample gx = approx_green(pb, x_index, rho, fwd);
  const int m = pb.cs.m;
  // <delta_x e_a, G_y^c> = <L Gt_x^a, G_y^c> = <Gt_x^a, delta_y e_c>.
  const auto a = ball_average(gy, gx.y, rho);
  const auto b = ball_average(gx, gy.y, rho);
  ReciprocityReport r;
  for (int i = 0; i < m; ++i)
    for (int c = 0; c < m; ++c) {
      const double lhs = a[static_cast<std::size_t>(i * m + c)], rhs = b[static_cast<std::size_t>(c * m + i)];
      r.max_abs_diff = std::max(r.max_abs_diff, std::abs(lhs - rhs));
      r.scale = std::max({r.scale, std::abs(lhs), std::abs(rhs)});
    }
  r.relative = r.scale > 0.0 ? r.max_abs_diff / r.scale : r.max_abs_diff;
  return r;
}

DecayFit decay_fit(const GreenSample& s) {
  const Grid& g = s.columns.front().grid();
  require(g.dim() == 3, ErrorKind::InvalidArgument, "decay fits need d = 3 (the d = 2 kernel is logarithmic)");
  const int m = static_cast<int>(s.columns.size());
  const double h = g.max_spacing(), dy = g.boundary_distance(s.y);
  const double rmin = std::max(4.0 * h, 4.0 * s.rho * (1.0 + 1e-12)), rmax = 0.5 * dy;
  DecayFit fit;
  std::vector<double> block(static_cast<std::size_t>(m * m));
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Point x = g.coords(p);
    const double r = distance(x, s.y, 3);
    // rho < r/4 is strict.
    if (r < 4.0 * h || r > rmax || !(s.rho < r / 4.0)) continue;
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < m; ++c) block[static_cast<std::size_t>(a * m + c)] = s.columns[static_cast<std::size_t>(c)](p, a);
    const double gv = frobenius(block);
    if (gv > 0.0) fit.pairs.push_back({r, gv, g.boundary_distance(x), dy});
  }
  if (fit.pairs.size() < 10) {
    std::ostringstream os;
    os << "decay fit needs at least 10 admissible pairs, found " << fit.pairs.size() << " in r in [" << rmin << ", " << rmax << "]";
    fail(ErrorKind::InvalidArgument, os.str());
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, lo = fit.pairs.front().r, hi = lo;
  const double n = static_cast<double>(fit.pairs.size());
  for (const auto& pr : fit.pairs) {
    const double lx = std::log(pr.r), ly = std::log(pr.g);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    lo = std::min(lo, pr.r);
    hi = std::max(hi, pr.r);
  }
  const double den = n * sxx - sx * sx;
  require(den > 0.0, ErrorKind::InvalidArgument, "decay fit pairs share a single distance");
  fit.exponent = (n * sxy - sx * sy) / den;
  const double intercept = (sy - fit.exponent * sx) / n;
  fit.prefactor = std::exp(intercept);
  double ss = 0.0;
  for (const auto& pr : fit.pairs) {
    const double e = std::log(pr.g) - intercept - fit.exponent * std::log(pr.r);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  fit.decades = std::log10(hi / lo);
  return fit;
}

double boundary_weighted_ratio(const GreenSample& s) {
  const Grid& g = s.columns.front().grid();
  const int d = g.dim(), m = static_cast<int>(s.columns.size());
  const double dy = g.boundary_distance(s.y);
  const double rmin = std::max(4.0 * g.max_spacing(), 4.0 * s.rho);
  std::vector<double> block(static_cast<std::size_t>(m * m));
  double worst = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g.is_boundary(p)) continue;
    const double r = distance(g.coords(p), s.y, d);
    if (r < rmin) continue;
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < m; ++c) block[static_cast<std::size_t>(a * m + c)] = s.columns[static_cast<std::size_t>(c)](p, a);
    worst = std::max(worst, frobenius(block) * std::pow(r, d - 1) / dy);
  }
  return worst;
}

std::vector<double> poisson_kernel_boundary_rep(const DirichletProblem& pb, const GreenSample& s, const GridFunction& gdata) {
  require(!s.columns.empty(), ErrorKind::InvalidArgument, "missing Green samples");
  require(!s.forward, ErrorKind::InvalidArgument, "the boundary representation needs the adjoint-solve Green matrix");
  const Grid& g = pb.grid;
  const int d = g.dim(), m = pb.cs.m;
  require(gdata.components() == m && gdata.grid().same_shape(g), ErrorKind::DimensionMismatch, "boundary data does not match the grid");
  SampleOptions so;
  so.min_points_per_period = 16.0;
  so.override_guard = pb.guard_override;
  const SampledCoefficients coeff = sample_on(pb.cs, g, pb.eps, so);
  std::vector<double> u(static_cast<std::size_t>(m), 0.0);
  for (int k = 0; k < d; ++k) {
    const double hk = g.spacing(k);
    for (int side = 0; side < 2; ++side) {
      const int edge = side == 0 ? 0 : g.cells(k);
      const int inward = side == 0 ? 1 : -1;
      for (std::size_t q = 0; q < g.size(); ++q) {
        Index i = g.index(q);
        if (i[k] != edge) continue;
        double w = 1.0;
        for (int j = 0; j < d; ++j) {
          if (j == k) continue;
          w *= (i[j] == 0 || i[j] == g.cells(j)) ? 0.5 * g.spacing(j) : g.spacing(j);
        }
        Index i1 = i, i2 = i;
        i1[k] += inward;
        i2[k] += 2 * inward;
        const std::size_t q1 = g.flat(i1), q2 = g.flat(i2);
        for (int c = 0; c < m; ++c) {
          const GridFunction& G = s.columns[static_cast<std::size_t>(c)];
          for (int a = 0; a < m; ++a) {
            // n_i n_j a_ji^{beta a} reduces to a_kk^{beta a}; d_n G = -(4 G1 - G2 - 3 G0) / (2h).
            double flux = 0.0;
            for (int b = 0; b < m; ++b) {
              const double dn = -(4.0 * G(q1, b) - G(q2, b) - 3.0 * G(q, b)) / (2.0 * hk);
              flux += coeff.A(q, ((k * d + k) * m + b) * m + a) * dn;
            }
            u[static_cast<std::size_t>(c)] += -w * flux * gdata(q, a);
          }
        }
      }
    }
  }
  return u;
}

std::vector<GridFunction> boundary_battery(const Grid& grid, int m, int count, std::uint64_t seed) {
  require(count >= 10, ErrorKind::InvalidArgument, "the boundary battery needs at least 10 entries");
  const int d = grid.dim();
  Rng rng(seed, 0x6e74);
  std::vector<GridFunction> out;
  for (int t = 0; t < count; ++t) {
    // Even entries: trigonometric traces; odd entries: localized bumps on the boundary.
    std::vector<double> freq(static_cast<std::size_t>(d)), centre(static_cast<std::size_t>(d));
    for (auto& f : freq) f = 1.0 + std::floor(3.0 * rng.uniform());
    for (int k = 0; k < d; ++k) centre[static_cast<std::size_t>(k)] = grid.extent(k) * rng.uniform();
    const int face = static_cast<int>(std::floor(2.0 * d * rng.uniform()));
    centre[static_cast<std::size_t>(face / 2)] = face % 2 == 0 ? 0.0 : grid.extent(face / 2);
    const double phase = 2.0 * std::numbers::pi * rng.uniform(), width = 0.1 + 0.1 * rng.uniform();
    std::vector<double> amp(static_cast<std::size_t>(m));
    for (auto& a : amp) a = rng.uniform(0.5, 1.5);
    GridFunction gfun(grid, m);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      if (!grid.is_boundary(p)) continue;
      const Point x = grid.coords(p);
      double v;
      if (t % 2 == 0) {
        v = phase;
        for (int k = 0; k < d; ++k) v += std::numbers::pi * freq[static_cast<std::size_t>(k)] * x[k] / grid.extent(k);
        v = std::cos(v);
      } else {
        double r2 = 0.0;
        for (int k = 0; k < d; ++k) r2 += (x[k] - centre[static_cast<std::size_t>(k)]) * (x[k] - centre[static_cast<std::size_t>(k)]);
        v = std::exp(-r2 / (width * width));
      }
      for (int a = 0; a < m; ++a) gfun(p, a) = amp[static_cast<std::size_t>(a)] * v;
    }
    out.push_back(std::move(gfun));
  }
  return out;
}

MaximalProbe maximal_function_probe(const DirichletProblem& pb, const std::vector<GridFunction>& battery, double p, double N0,
                                    const BvpOptions& opts) {
  require(battery.size() >= 10, ErrorKind::InvalidArgument, "the boundary battery needs at least 10 entries");
  MaximalProbe out;
  const FluxOperator op = assemble(pb);
  for (const auto& gdata : battery) {
    DirichletProblem q = pb;
    q.f = GridFunction();
    q.F = GridFunction();
    q.g = gdata;
    GridFunction x(pb.grid, pb.cs.m);
    for (std::size_t i = 0; i < pb.grid.size(); ++i)
      if (pb.grid.is_boundary(i))
        for (int a = 0; a < pb.cs.m; ++a) x(i, a) = gdata(i, a);
    SolveOptions so;
    so.tol = opts.tol;
    so.max_iter = opts.max_iter;
    so.force_nonsymmetric = opts.force_nonsymmetric;
    solve_linear(op, load_vector(q), x, so);
    ++out.solves;
    const MaximalFunction mf = nontangential_max(x, N0);
    out.widened += mf.widened;
    const double gp = boundary_lp_norm(gdata, p);
    if (gp > 0.0) out.cp = std::max(out.cp, boundary_lp_norm(mf.values, p) / gp);
    const double ginf = norm(gdata, NormSpec::Linf());
    if (ginf > 0.0) out.max_ratio = std::max(out.max_ratio, norm(x, NormSpec::Linf()) / ginf);
  }
  return out;
}

}  // namespace homog
