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

#include "homog/rates.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include "homog/error.hpp"
#include "homog/green.hpp"

namespace homog {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool is_dyadic(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) return false;
  int e = 0;
  return std::frexp(eps, &e) == 0.5;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double pointwise_max(const GridFunction& u, bool boundary_only) {
  const Grid& g = u.grid();
  double best = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (boundary_only && !g.is_boundary(p)) continue;
    double s = 0.0;
    for (int c = 0; c < u.components(); ++c) s += u(p, c) * u(p, c);
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

/// Restriction by injection from a nested finer box grid.
GridFunction inject(const GridFunction& fine, const Grid& coarse) {
  const Grid& gf = fine.grid();
  const int d = coarse.dim();
  std::array<int, 3> stride{1, 1, 1};
  for (int k = 0; k < d; ++k) {
    require(gf.cells(k) % coarse.cells(k) == 0, ErrorKind::DimensionMismatch, "grids are not nested");
    stride[k] = gf.cells(k) / coarse.cells(k);
  }
  GridFunction out(coarse, fine.components());
  for (std::size_t p = 0; p < coarse.size(); ++p) {
    Index i = coarse.index(p);
    for (int k = 0; k < d; ++k) i[k] *= stride[k];
    const std::size_t q = gf.flat(i);
    for (int c = 0; c < fine.components(); ++c) out(p, c) = fine(q, c);
  }
  return out;
}

int row_cells(const SweepConfig& cfg, double eps) {
  return cfg.fixed_cells > 0 ? cfg.fixed_cells : static_cast<int>(std::lround(cfg.points_per_period / eps));
}

/// The rows use h <= eps/16 unless the configuration asks for coarser grids.
bool coarse_rule(const SweepConfig& cfg, double eps) { return row_cells(cfg, eps) * eps < 16.0 - 1e-9; }

CoefficientSet sweep_family(const SweepConfig& cfg) { return builtin_family(cfg.family, cfg.params); }

double sweep_lambda(const SweepConfig& cfg, const CoefficientSet& cs) { return cfg.lambda_default ? default_lambda(cs) : cfg.lambda; }

}  // namespace

RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
  RateFit fit;
  std::vector<double> xs, ys;
  for (const auto& [eps, err] : pairs) {
    if (!(eps > 0.0) || !(err > 0.0) || !std::isfinite(err)) {
      ++fit.dropped;
      continue;
    }
    xs.push_back(std::log(eps));
    ys.push_back(std::log(err));
  }
  fit.used = static_cast<int>(xs.size());
  require(fit.used >= 3, ErrorKind::InvalidArgument,
          "rate fit needs at least 3 positive errors, got " + std::to_string(fit.used) + " (" + std::to_string(fit.dropped) + " dropped)");
  const double n = fit.used;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  require(sxx > 0.0, ErrorKind::InvalidArgument, "rate fit needs distinct eps values");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

ExpansionError expansion_error(const GridFunction& u_eps, const GridFunction& u, const DirichletCorrectorSet& phis,
                               const GridFunction* grad_u) {
  const Grid& g = u.grid();
  const int d = g.dim(), m = u.components();
  require(u_eps.grid().same_shape(g) && phis.grid.same_shape(g), ErrorKind::DimensionMismatch, "expansion fields live on different grids");
  require(u_eps.components() == m && phis.m == m && phis.d == d, ErrorKind::DimensionMismatch, "expansion fields disagree on m or d");
  GridFunction local;
  if (grad_u == nullptr) {
    local = gradient(u);
    grad_u = &local;
  }
  require(grad_u->grid().same_shape(g) && grad_u->components() == m * d, ErrorKind::DimensionMismatch, "gradient does not match u");

  ExpansionError out;
  out.w = GridFunction(g, m);
  GridFunction t0(g, m), tk(g, m);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Point x = g.coords(p);
    for (int ga = 0; ga < m; ++ga) {
      double a0 = 0.0, ak = 0.0;
      for (int be = 0; be < m; ++be) {
        const double delta = ga == be ? 1.0 : 0.0;
        a0 += (phis.phi0(p, ga * m + be) - delta) * u(p, be);
        for (int k = 0; k < d; ++k)
          ak += (phis.phi[static_cast<std::size_t>(k)](p, ga * m + be) - x[k] * delta) * (*grad_u)(p, be * d + k);
      }
      t0(p, ga) = a0;
      tk(p, ga) = ak;
      out.w(p, ga) = u_eps(p, ga) - u(p, ga) - a0 - ak;
    }
  }
  out.h1 = h1_norm(out.w);
  out.h1_interior = h1_norm(out.w, Region{0.125});
  out.l2 = norm(out.w, NormSpec::Lp(2.0));
  out.phi0_term_l2 = norm(t0, NormSpec::Lp(2.0));
  out.phik_term_l2 = norm(tk, NormSpec::Lp(2.0));
  out.boundary_max = pointwise_max(out.w, true);
  return out;
}

LoadKind parse_load(const std::string& name) {
  if (name == "one") return LoadKind::One;
  if (name == "sine") return LoadKind::Sine;
  if (name == "bump") return LoadKind::Bump;
  fail(ErrorKind::Config, "unknown load '" + name + "' (expected one, sine or bump)");
}

std::string load_name(LoadKind kind) {
  switch (kind) {
    case LoadKind::One: return "one";
    case LoadKind::Sine: return "sine";
    case LoadKind::Bump: return "bump";
  }
  return "one";
}

GridFunction make_load(const Grid& grid, int m, LoadKind kind) {
  const int d = grid.dim();
  GridFunction F(grid, m);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Point x = grid.coords(p);
    double v = 1.0;
    if (kind == LoadKind::Sine) {
      for (int k = 0; k < d; ++k) v *= std::sin(std::numbers::pi * x[k]);
    } else if (kind == LoadKind::Bump) {
      double r2 = 0.0;
      for (int k = 0; k < d; ++k) r2 += (x[k] - 0.5 * grid.extent(k)) * (x[k] - 0.5 * grid.extent(k));
      v = std::exp(-r2 / (2.0 * 0.1 * 0.1));
    }
    for (int c = 0; c < m; ++c) F(p, c) = v;
  }
  return F;
}

void validate_sweep(const SweepConfig& cfg) {
  require(!cfg.eps.empty(), ErrorKind::Config, "eps list is empty");
  for (std::size_t i = 0; i < cfg.eps.size(); ++i) {
    require(is_dyadic(cfg.eps[i]), ErrorKind::Config, "eps must be dyadic, got " + fmt(cfg.eps[i]));
    require(cfg.eps[i] <= 1.0, ErrorKind::Config, "eps must not exceed 1");
    if (i > 0) require(cfg.eps[i] < cfg.eps[i - 1], ErrorKind::Config, "eps must be strictly decreasing");
  }
  require(cfg.points_per_period >= 2.0 && std::isfinite(cfg.points_per_period), ErrorKind::Config, "points_per_period must be >= 2");
  require(cfg.fixed_cells >= 0, ErrorKind::Config, "fixed_cells must be nonnegative");
  require(cfg.cell_n >= 0, ErrorKind::Config, "cell_n must be nonnegative");
  require(cfg.tol > 0.0 && cfg.tol < 1.0, ErrorKind::Config, "tol must lie in (0, 1)");
  require(cfg.threads >= 1, ErrorKind::Config, "threads must be >= 1");
  if (!cfg.lambda_default) require(std::isfinite(cfg.lambda), ErrorKind::Config, "lambda must be finite");
  const int finest = row_cells(cfg, cfg.eps.back());
  for (double eps : cfg.eps) {
    const double cells = cfg.fixed_cells > 0 ? cfg.fixed_cells : cfg.points_per_period / eps;
    require(std::abs(cells - std::round(cells)) < 1e-9, ErrorKind::Config, "grid rule gives a non-integer cell count at eps = " + fmt(eps));
    const double period = std::round(cells) * eps;
    require(std::abs(period - std::round(period)) < 1e-9, ErrorKind::Config,
            "eps/h must be an integer (commensurability guard) at eps = " + fmt(eps));
    require(period >= 8.0 - 1e-9, ErrorKind::Config, "resolution guard: fewer than 8 points per period at eps = " + fmt(eps));
    require(finest % row_cells(cfg, eps) == 0, ErrorKind::Config, "row grids must nest in the finest grid");
  }
}

ConvergenceReport run_sweep(const SweepConfig& cfg) {
  validate_sweep(cfg);
  ConvergenceReport rep;
  rep.config = cfg;
  const CoefficientSet cs = sweep_family(cfg);
  const int d = cs.d, m = cs.m;
  rep.lambda = sweep_lambda(cfg, cs);
  const int cell_n = cfg.cell_n > 0 ? cfg.cell_n : static_cast<int>(std::lround(cfg.points_per_period));
  CellOptions copts;
  copts.tol = std::min(cfg.tol, 1e-10);
  rep.hats = run_cell(cs, cell_n, copts).hats;

  BvpOptions bopts;
  bopts.tol = cfg.tol;
  rep.fine_cells = row_cells(cfg, cfg.eps.back());
  const Grid fine = Grid::unit_box(d, rep.fine_cells);

  const double solves_per_row = 1.0 + (cfg.correctors ? static_cast<double>(m * (d + 1)) : 0.0);
  rep.work = static_cast<double>(fine.size());
  for (double eps : cfg.eps) rep.work += solves_per_row * static_cast<double>(Grid::unit_box(d, row_cells(cfg, eps)).size());
  rep.work_warning = rep.work > 1e9;

  GridFunction u_fine, grad_fine;
  try {
    // The homogenized operator carries its own constants; lambda follows the oscillating problem.
    u_fine = solve_homogenized(rep.hats, rep.lambda, fine, GridFunction(), make_load(fine, m, cfg.load), GridFunction(), bopts, true).u;
    grad_fine = gradient(u_fine);
  } catch (const Error& e) {
    rep.complete = false;
    rep.failure = std::string("homogenized solve: ") + e.what();
    return rep;
  }

  const std::size_t nrows = cfg.eps.size();
  std::vector<SweepRow> rows(nrows);
  std::vector<std::string> errors(nrows);
  auto run_row = [&](std::size_t r) {
    const auto t0 = Clock::now();
    SweepRow& row = rows[r];
    row.eps = cfg.eps[r];
    row.cells = row_cells(cfg, row.eps);
    const Grid grid = Grid::unit_box(d, row.cells);
    row.h = grid.spacing(0);
    try {
      DirichletProblem pb = make_problem(cs, row.eps, grid);
      pb.lambda = rep.lambda;
      pb.lambda_override = !cfg.lambda_default;
      pb.guard_override = coarse_rule(cfg, row.eps);
      pb.F = make_load(grid, m, cfg.load);
      const BvpSolution sol = solve(pb, bopts);
      row.iterations = sol.report.iterations;
      const GridFunction u = inject(u_fine, grid);
      GridFunction diff = sol.u;
      diff -= u;
      row.l2 = norm(diff, NormSpec::Lp(2.0));
      row.linf = norm(diff, NormSpec::Linf());
      row.h1 = h1_norm(diff);
      row.h1_interior = h1_norm(diff, Region{0.125});
      if (cfg.correctors) {
        DirichletOptions dopts;
        dopts.tol = cfg.tol;
        dopts.guard_override = pb.guard_override;
        const DirichletCorrectorSet phis = solve_dirichlet_correctors(cs, row.eps, grid, dopts);
        const GridFunction grad = inject(grad_fine, grid);
        const ExpansionError ee = expansion_error(sol.u, u, phis, &grad);
        row.w_h1 = ee.h1;
        row.w_h1_interior = ee.h1_interior;
        row.w_l2 = ee.l2;
        row.phi0_term_l2 = ee.phi0_term_l2;
        row.phik_term_l2 = ee.phik_term_l2;
        row.w_boundary = ee.boundary_max;
        row.triangle_slack = ee.l2 + ee.phi0_term_l2 + ee.phik_term_l2 - row.l2;
      }
    } catch (const Error& e) {
      errors[r] = "eps = " + fmt(row.eps) + ": " + e.what();
    }
    row.wall_seconds = seconds_since(t0);
  };

  const int workers = std::min<int>(cfg.threads, static_cast<int>(nrows));
  if (workers <= 1) {
    for (std::size_t r = 0; r < nrows && errors[r > 0 ? r - 1 : 0].empty(); ++r) run_row(r);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex lock;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t r;
          {
            std::lock_guard<std::mutex> g(lock);
            if (next >= nrows) return;
            r = next++;
          }
          run_row(r);
        }
      });
    for (auto& t : pool) t.join();
  }

  for (std::size_t r = 0; r < nrows; ++r) {
    if (!errors[r].empty()) {
      rep.complete = false;
      rep.failure = errors[r];
      break;
    }
    if (rows[r].cells == 0) break;
    rep.rows.push_back(rows[r]);
  }

  // Errors at the solver floor carry no rate; they are fitted as zero and dropped.
  const double floor = 10.0 * cfg.tol;
  auto pairs = [&](auto field) {
    std::vector<std::pair<double, double>> out;
    for (const auto& row : rep.rows) out.emplace_back(row.eps, field(row) > floor ? field(row) : 0.0);
    return out;
  };
  auto try_fit = [](const std::vector<std::pair<double, double>>& p, RateFit& fit) {
    try {
      fit = fit_rate(p);
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  auto l2 = pairs([](const SweepRow& r) { return r.l2; });
  rep.has_rates = try_fit(l2, rep.l2_rate);
  if (rep.has_rates && l2.size() >= 4) {
    // Drop the coarsest row when its log residual dominates the rest.
    const double r0 = std::abs(std::log(l2[0].second) - (rep.l2_rate.intercept + rep.l2_rate.slope * std::log(l2[0].first)));
    double rest = 0.0;
    for (std::size_t i = 1; i < l2.size(); ++i)
      rest = std::max(rest, std::abs(std::log(l2[i].second) - (rep.l2_rate.intercept + rep.l2_rate.slope * std::log(l2[i].first))));
    if (r0 > 2.0 * rest) {
      rep.dropped_largest = true;
      rep.l2_rate = fit_rate({l2.begin() + 1, l2.end()});
    }
  }
  try_fit(pairs([](const SweepRow& r) { return r.linf; }), rep.linf_rate);
  try_fit(pairs([](const SweepRow& r) { return r.h1; }), rep.h1_rate);
  if (cfg.correctors) try_fit(pairs([](const SweepRow& r) { return r.w_h1_interior; }), rep.w_rate);
  return rep;
}

void write_report_csv(std::ostream& os, const ConvergenceReport& r) {
  os << "eps,h,cells,l2,linf,h1,h1_interior,w_h1,w_h1_interior,w_l2,phi0_term_l2,phik_term_l2,triangle_slack,w_boundary,iterations\n";
  for (const auto& row : r.rows) {
    os << fmt(row.eps) << ',' << fmt(row.h) << ',' << row.cells << ',' << fmt(row.l2) << ',' << fmt(row.linf) << ',' << fmt(row.h1) << ','
       << fmt(row.h1_interior) << ',' << fmt(row.w_h1) << ',' << fmt(row.w_h1_interior) << ',' << fmt(row.w_l2) << ','
       << fmt(row.phi0_term_l2) << ',' << fmt(row.phik_term_l2) << ',' << fmt(row.triangle_slack) << ',' << fmt(row.w_boundary) << ','
       << row.iterations << '\n';
  }
}

namespace {

nlohmann::json fit_json(const RateFit& f) {
  if (f.used < 3) return nullptr;
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}, {"used", f.used}, {"dropped", f.dropped}};
}

}  // namespace

nlohmann::json report_json(const ConvergenceReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"eps", row.eps},
                    {"h", row.h},
                    {"cells", row.cells},
                    {"l2", row.l2},
                    {"linf", row.linf},
                    {"h1", row.h1},
                    {"h1_interior", row.h1_interior},
                    {"w_h1", row.w_h1},
                    {"w_h1_interior", row.w_h1_interior},
                    {"w_l2", row.w_l2},
                    {"phi0_term_l2", row.phi0_term_l2},
                    {"phik_term_l2", row.phik_term_l2},
                    {"triangle_slack", row.triangle_slack},
                    {"w_boundary", row.w_boundary},
                    {"iterations", row.iterations},
                    {"wall_seconds", row.wall_seconds}});
  return {{"family", r.config.family},
          {"params", r.config.params},
          {"load", load_name(r.config.load)},
          {"lambda", r.lambda},
          {"fine_cells", r.fine_cells},
          {"tol", r.config.tol},
          {"threads", r.config.threads},
          {"work", r.work},
          {"work_warning", r.work_warning},
          {"complete", r.complete},
          {"failure", r.failure},
          {"a_hat", r.hats.A_hat},
          {"rows", rows},
          {"rates",
           {{"l2", fit_json(r.l2_rate)},
            {"linf", fit_json(r.linf_rate)},
            {"h1_uncorrected", fit_json(r.h1_rate)},
            {"w_h1_interior", fit_json(r.w_rate)},
            {"dropped_largest", r.dropped_largest}}}};
}

void write_rate_svg(std::ostream& os, const ConvergenceReport& r) {
  const double W = 480, H = 360, pad = 48;
  std::vector<double> xs, ys;
  for (const auto& row : r.rows) {
    xs.push_back(std::log10(row.eps));
    for (double v : {row.l2, row.w_h1_interior})
      if (v > 0.0) ys.push_back(std::log10(v));
  }
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (xs.size() < 2 || ys.empty()) {
    os << "<text x=\"" << pad << "\" y=\"" << pad << "\">not enough rows</text>\n</svg>\n";
    return;
  }
  const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
  double ylo = *std::min_element(ys.begin(), ys.end()), yhi = *std::max_element(ys.begin(), ys.end());
  if (yhi - ylo < 1e-12) yhi = ylo + 1.0;
  const double x0 = *xlo, x1 = *xhi;
  auto X = [&](double v) { return pad + (v - x0) / (x1 - x0) * (W - 2 * pad); };
  auto Y = [&](double v) { return H - pad - (v - ylo) / (yhi - ylo) * (H - 2 * pad); };
  os << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad << "\" y2=\"" << H - pad << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << H - pad << "\" stroke=\"black\"/>\n";
  auto series = [&](auto field, const char* colour, const char* label, double ly) {
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" points=\"";
    for (const auto& row : r.rows)
      if (field(row) > 0.0) os << fmt(X(std::log10(row.eps))) << ',' << fmt(Y(std::log10(field(row)))) << ' ';
    os << "\"/>\n<text x=\"" << W - 2.5 * pad << "\" y=\"" << ly << "\" fill=\"" << colour << "\" font-size=\"12\">" << label << "</text>\n";
  };
  series([](const SweepRow& row) { return row.l2; }, "#1f77b4", "L2 error", pad);
  series([](const SweepRow& row) { return row.w_h1_interior; }, "#d62728", "corrected H1", pad + 16);
  // Slope-1 reference through the finest L2 point.
  if (r.rows.back().l2 > 0.0) {
    const double yb = std::log10(r.rows.back().l2);
    os << "<line x1=\"" << fmt(X(x0)) << "\" y1=\"" << fmt(Y(yb)) << "\" x2=\"" << fmt(X(x1)) << "\" y2=\"" << fmt(Y(yb + (x1 - x0)))
       << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  os << "<text x=\"" << W / 2 - 20 << "\" y=\"" << H - 12 << "\" font-size=\"12\">log10 eps</text>\n</svg>\n";
}

ProbeKind parse_probe(const std::string& name) {
  if (name == "W1p") return ProbeKind::W1p;
  if (name == "Holder") return ProbeKind::Holder;
  if (name == "Lipschitz") return ProbeKind::Lipschitz;
  if (name == "MaxPrinciple") return ProbeKind::MaxPrinciple;
  fail(ErrorKind::Config, "unknown probe '" + name + "' (expected W1p, Holder, Lipschitz or MaxPrinciple)");
}

std::string probe_name(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::W1p: return "W1p";
    case ProbeKind::Holder: return "Holder";
    case ProbeKind::Lipschitz: return "Lipschitz";
    case ProbeKind::MaxPrinciple: return "MaxPrinciple";
  }
  return "W1p";
}

ProbeResult uniform_constant_probe(ProbeKind kind, const SweepConfig& cfg) {
  validate_sweep(cfg);
  const CoefficientSet cs = sweep_family(cfg);
  const double lambda = sweep_lambda(cfg, cs);
  BvpOptions bopts;
  bopts.tol = cfg.tol;
  ProbeResult res;
  res.kind = kind;
  for (double eps : cfg.eps) {
    const Grid grid = Grid::unit_box(cs.d, row_cells(cfg, eps));
    DirichletProblem pb = make_problem(cs, eps, grid);
    pb.lambda = lambda;
    pb.lambda_override = !cfg.lambda_default;
    pb.guard_override = coarse_rule(cfg, eps);
    double ratio = 0.0;
    if (kind == ProbeKind::MaxPrinciple) {
      ratio = maximal_function_probe(pb, boundary_battery(grid, cs.m, 10, cfg.seed), 2.0, 2.0, bopts).cp;
    } else {
      pb.F = make_load(grid, cs.m, cfg.load);
      const GridFunction u = solve(pb, bopts).u;
      if (kind == ProbeKind::W1p)
        ratio = norm(gradient(u), NormSpec::Lp(4.0)) / norm(pb.F, NormSpec::Lp(4.0));
      else if (kind == ProbeKind::Holder)
        ratio = holder_seminorm(u, 0.5) / norm(pb.F, NormSpec::Linf());
      else
        ratio = norm(gradient(u), NormSpec::Linf()) / norm(pb.F, NormSpec::Linf());
    }
    res.eps.push_back(eps);
    res.constants.push_back(ratio);
  }
  const auto [lo, hi] = std::minmax_element(res.constants.begin(), res.constants.end());
  res.dispersion = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  return res;
}

}  // namespace homog
