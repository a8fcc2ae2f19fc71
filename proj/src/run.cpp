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

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homog/bvp.hpp"
#include "homog/cell.hpp"
#include "homog/dirichlet.hpp"
#include "homog/experiment.hpp"
#include "homog/green.hpp"
#include "homog/rates.hpp"

namespace homog {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

/// Per-run bookkeeping shared by the subcommand handlers.
struct Context {
  Context(const ExperimentConfig& c, fs::path d) : cfg(c), dir(std::move(d)) {}
  const ExperimentConfig& cfg;
  fs::path dir;
  nlohmann::json summary = nlohmann::json::object();
  nlohmann::json wall = nlohmann::json::object();
  std::vector<std::string> outputs, warnings;
  bool partial = false;

  template <class F>
  auto timed(const std::string& op, F&& f) {
    const auto t0 = Clock::now();
    auto r = f();
    wall[op] = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream os(dir / name, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + (dir / name).string() + " for writing");
    os << content;
    os.flush();
    require(static_cast<bool>(os), ErrorKind::Io, "write failed for " + (dir / name).string());
    outputs.push_back(name);
  }
  void write_field(const std::string& name, const GridFunction& u) {
    std::ostringstream os;
    write_csv(os, u);
    write(name, os.str());
  }
};

CoefficientSet family_of(const ExperimentConfig& c) { return builtin_family(c.family, c.params); }

double lambda_of(const ExperimentConfig& c, const CoefficientSet& cs) { return c.lambda_default ? default_lambda(cs) : c.lambda; }

CellOptions cell_options(const ExperimentConfig& c) {
  CellOptions o;
  o.tol = c.tol;
  return o;
}

nlohmann::json hats_json(const HomogenizedCoefficients& h) {
  nlohmann::json j{{"A_hat", h.A_hat}, {"V_hat", h.V_hat}, {"B_hat", h.B_hat}, {"c_hat", h.c_hat},
                   {"min_symbol", h.min_symbol}, {"max_symbol", h.max_symbol}, {"d", h.d}, {"m", h.m}};
  if (h.m == 1) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < h.d; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int k = 0; k < h.d; ++k) row.push_back(h.A_hat[static_cast<std::size_t>(i * h.d + k)]);
      a.push_back(row);
    }
    j["a_hat"] = a;
  }
  return j;
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}
int max_of(const std::vector<int>& v) {
  int m = 0;
  for (int x : v) m = std::max(m, x);
  return m;
}

/// Concatenates fields of equal grid into one multi-component field.
GridFunction stack(const std::vector<const GridFunction*>& parts) {
  int ncomp = 0;
  for (const auto* p : parts) ncomp += p->components();
  const Grid& g = parts.front()->grid();
  GridFunction out(g, ncomp);
  for (std::size_t q = 0; q < g.size(); ++q) {
    int off = 0;
    for (const auto* p : parts) {
      for (int c = 0; c < p->components(); ++c) out(q, off + c) = (*p)(q, c);
      off += p->components();
    }
  }
  return out;
}

std::size_t snap(const Grid& g, const std::vector<double>& pt) {
  Index i{0, 0, 0};
  for (int k = 0; k < g.dim(); ++k) {
    const double v = pt.empty() ? 0.5 : pt[static_cast<std::size_t>(k)];
    i[k] = static_cast<int>(std::lround(v * g.cells(k)));
  }
  return g.flat(i);
}

void run_cell_cmd(Context& ctx, bool fluxes) {
  const auto& c = ctx.cfg;
  const CoefficientSet cs = family_of(c);
  const CellResult cr = ctx.timed("cell", [&] { return run_cell(cs, c.n, cell_options(c)); });
  nlohmann::json s = hats_json(cr.hats);
  s["n"] = c.n;
  s["residual_max"] = max_of(cr.correctors.residuals);
  s["iterations_max"] = max_of(cr.correctors.iterations);
  s["corrector_mean_max"] = cr.correctors.max_mean;
  if (fluxes) {
    const FluxCorrectorSet f = ctx.timed("flux_correctors", [&] { return all_flux_correctors(cs, cr.correctors, cr.hats); });
    const FluxIdentityResiduals r = flux_identity_residuals(f, cs.d, cs.m);
    s["flux_identities"] = {{"E_antisymmetry", r.E_antisymmetry}, {"F_antisymmetry", r.F_antisymmetry}, {"div_E", r.div_E}, {"div_F", r.div_F}};
    s["solvability"] = {{"mean_b", f.mean_b}, {"mean_U", f.mean_U}, {"mean_W", f.mean_W}, {"mean_Z", f.mean_Z}};
    std::vector<const GridFunction*> parts{&cr.correctors.chi0};
    for (const auto& chi : cr.correctors.chi) parts.push_back(&chi);
    ctx.write_field("cell_correctors.csv", stack(parts));
  } else {
    std::ostringstream os;
    os << "tensor,index,value\n";
    char buf[40];
    for (const auto& [name, v] : {std::pair<const char*, const std::vector<double>*>{"A_hat", &cr.hats.A_hat},
                                  {"V_hat", &cr.hats.V_hat},
                                  {"B_hat", &cr.hats.B_hat},
                                  {"c_hat", &cr.hats.c_hat}}) {
      for (std::size_t i = 0; i < v->size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", (*v)[i]);
        os << name << ',' << i << ',' << buf << '\n';
      }
    }
    ctx.write("homogenized.csv", os.str());
  }
  ctx.summary = s;
}

void run_solve_cmd(Context& ctx) {
  const auto& c = ctx.cfg;
  const CoefficientSet cs = family_of(c);
  const Grid grid = Grid::unit_box(cs.d, c.n);
  const double eps = c.eps.front();
  const double lambda = lambda_of(c, cs);
  GridFunction F = make_load(grid, cs.m, parse_load(c.load));
  GridFunction g = GridFunction(grid, cs.m);
  if (c.boundary == "affine")
    for (std::size_t p = 0; p < grid.size(); ++p)
      for (int a = 0; a < cs.m; ++a) g(p, a) = 1.0 + grid.coords(p)[0];
  BvpOptions opts;
  opts.tol = c.tol;
  CoefficientSet op_set = cs;
  double op_eps = eps;
  BvpSolution sol;
  if (c.homogenized) {
    const int cell_n = c.cell_n > 0 ? c.cell_n : 32;
    const HomogenizedCoefficients hats = ctx.timed("cell", [&] { return run_cell(cs, cell_n, cell_options(c)).hats; });
    op_set = homogenized_set(hats);
    op_eps = 1.0;
    ctx.summary["homogenized"] = hats_json(hats);
    sol = ctx.timed("solve", [&] { return solve_homogenized(hats, lambda, grid, GridFunction(), F, g, opts, true); });
  } else {
    DirichletProblem pb = make_problem(cs, eps, grid);
    pb.lambda = lambda;
    pb.lambda_override = !c.lambda_default;
    pb.guard_override = c.guard_override;
    pb.F = F;
    pb.g = g;
    sol = ctx.timed("solve", [&] { return solve(pb, opts); });
  }
  const double lambda0 = estimate_lambda0(cs);
  if (lambda < lambda0) ctx.warnings.push_back("lambda " + std::to_string(lambda) + " is below the coercivity estimate " + std::to_string(lambda0));
  if (c.guard_override) ctx.warnings.push_back("resolution guard overridden");
  const CoercivityReport cr =
      ctx.timed("coercivity", [&] { return coercivity_battery(op_set, op_eps, grid, lambda, 20, c.seed); });
  ctx.summary["residual"] = sol.residual;
  ctx.summary["iterations"] = sol.report.iterations;
  ctx.summary["method"] = sol.report.method;
  ctx.summary["lambda"] = lambda;
  ctx.summary["lambda0"] = lambda0;
  ctx.summary["coercivity"] = {{"min_ratio", cr.min_ratio}, {"c0", cr.c0}, {"margin", cr.min_ratio - cr.c0}, {"violations", cr.violations}, {"samples", cr.samples}};
  ctx.summary["norms"] = {{"l2", norm(sol.u, NormSpec::Lp(2.0))}, {"linf", norm(sol.u, NormSpec::Linf())}, {"h1", h1_norm(sol.u)}};
  ctx.write_field("solve_u.csv", sol.u);
}

void run_correctors_cmd(Context& ctx) {
  const auto& c = ctx.cfg;
  const CoefficientSet cs = family_of(c);
  const Grid grid = Grid::unit_box(cs.d, c.n);
  const double eps = c.eps.front();
  DirichletOptions o;
  o.tol = c.tol;
  o.guard_override = c.guard_override;
  if (c.guard_override) ctx.warnings.push_back("resolution guard overridden");
  const DirichletCorrectorSet set = ctx.timed("dirichlet_correctors", [&] { return solve_dirichlet_correctors(cs, eps, grid, o); });
  nlohmann::json s{{"eps", eps}, {"n", c.n}, {"phi0_deviation", phi0_deviation(set)}, {"phi0_deviation_over_eps", phi0_deviation(set) / eps}};
  nlohmann::json dk = nlohmann::json::array(), dke = nlohmann::json::array();
  for (int k = 1; k <= cs.d; ++k) {
    dk.push_back(phik_deviation(set, k));
    dke.push_back(phik_deviation(set, k) / eps);
  }
  s["phik_deviation"] = dk;
  s["phik_deviation_over_eps"] = dke;
  s["residual_max"] = max_of(set.residuals);
  s["iterations_max"] = max_of(set.iterations);
  const double period = eps * c.n;
  if (std::abs(period - std::round(period)) < 1e-9 && std::lround(period) >= 4) {
    const CorrectorSet cell = ctx.timed("cell", [&] { return solve_correctors(cs, static_cast<int>(std::lround(period)), cell_options(c)); });
    const PsiDiagnostics pd = ctx.timed("psi", [&] { return psi_diagnostics(set, cell); });
    s["psi"] = {{"sup", pd.sup},
                {"grad_sup", pd.grad_sup},
                {"interior_sup", pd.interior_sup},
                {"envelope_constant", pd.envelope_constant},
                {"envelope_dispersion", pd.envelope_dispersion},
                {"boundary_defect", pd.boundary_defect}};
  } else {
    ctx.warnings.push_back("psi diagnostics skipped: eps/h is not an integer >= 4");
  }
  std::vector<const GridFunction*> parts{&set.phi0};
  for (const auto& p : set.phi) parts.push_back(&p);
  ctx.write_field("correctors_phi.csv", stack(parts));
  ctx.summary = s;
}

void run_green_cmd(Context& ctx) {
  const auto& c = ctx.cfg;
  const CoefficientSet cs = family_of(c);
  const Grid grid = Grid::unit_box(cs.d, c.n);
  DirichletProblem pb = make_problem(cs, c.eps.front(), grid);
  pb.lambda = lambda_of(c, cs);
  pb.lambda_override = !c.lambda_default;
  pb.guard_override = c.guard_override;
  if (c.guard_override) ctx.warnings.push_back("resolution guard overridden");
  const double rho = c.rho > 0.0 ? c.rho : 2.0 * grid.spacing(0);
  const std::size_t yi = snap(grid, c.y);
  GreenOptions go;
  go.tol = c.tol;
  const GreenSample s = ctx.timed("green", [&] { return approx_green(pb, yi, rho, go); });
  nlohmann::json out{{"y", {s.y[0], s.y[1], s.y[2]}}, {"rho", rho}, {"lambda", pb.lambda}, {"residual_max", max_of(s.residuals)}};
  const GridFunction F = make_load(grid, cs.m, parse_load(c.load));
  out["representation"] = represent(s, F);
  out["poisson_constant"] = poisson_kernel_boundary_rep(pb, s, GridFunction(grid, cs.m, 1.0));
  out["boundary_weighted_ratio"] = boundary_weighted_ratio(s);
  if (!c.x.empty()) {
    const ReciprocityReport r = ctx.timed("reciprocity", [&] { return reciprocity(pb, snap(grid, c.x), yi, rho, go); });
    out["reciprocity"] = {{"max_abs_diff", r.max_abs_diff}, {"scale", r.scale}, {"relative", r.relative}};
  }
  if (cs.d == 3) {
    try {
      const DecayFit f = decay_fit(s);
      out["decay"] = {{"exponent", f.exponent}, {"prefactor", f.prefactor}, {"residual", f.residual}, {"decades", f.decades}, {"pairs", f.pairs.size()}};
    } catch (const Error& e) {
      ctx.warnings.push_back(std::string("decay fit skipped: ") + e.what());
    }
  }
  std::vector<const GridFunction*> parts;
  for (const auto& col : s.columns) parts.push_back(&col);
  ctx.write_field("green_columns.csv", stack(parts));
  ctx.summary = out;
}

void run_rates_cmd(Context& ctx) {
  const auto& c = ctx.cfg;
  SweepConfig sc;
  sc.family = c.family;
  sc.params = c.params;
  sc.eps = c.eps;
  sc.points_per_period = c.points_per_period;
  sc.fixed_cells = c.fixed_cells;
  sc.cell_n = c.cell_n;
  sc.lambda_default = c.lambda_default;
  sc.lambda = c.lambda;
  sc.load = parse_load(c.load);
  sc.tol = c.tol;
  sc.correctors = c.correctors;
  sc.seed = c.seed;
  sc.threads = c.threads;
  const ConvergenceReport rep = ctx.timed("sweep", [&] { return run_sweep(sc); });
  nlohmann::json s = report_json(rep);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) ctx.wall["row_" + std::to_string(i)] = rep.rows[i].wall_seconds;
  if (rep.work_warning) ctx.warnings.push_back("sweep work exceeds 1e9 point-solves");
  if (!rep.complete) ctx.partial = true;
  if (!rep.rows.empty()) {
    double lo = INFINITY, hi = 0.0, slack = INFINITY;
    bool monotone = true;
    for (const auto& r : rep.rows) {
      lo = std::min(lo, r.w_h1_interior / r.eps);
      hi = std::max(hi, r.w_h1_interior / r.eps);
      slack = std::min(slack, r.triangle_slack);
      monotone = monotone && r.w_h1 <= r.h1;
    }
    if (c.correctors) {
      s["w_over_eps_dispersion"] = lo > 0.0 ? hi / lo : INFINITY;
      s["triangle_min_slack"] = slack;
      s["monotone"] = monotone;
    }
  }
  std::ostringstream csv;
  write_report_csv(csv, rep);
  ctx.write("rates.csv", csv.str());
  if (c.svg) {
    std::ostringstream svg;
    write_rate_svg(svg, rep);
    ctx.write("rates.svg", svg.str());
  }
  if (!c.probes.empty()) {
    std::ostringstream pcsv;
    pcsv << "probe,eps,constant\n";
    char buf[64];
    for (const auto& name : c.probes) {
      const ProbeResult pr = ctx.timed("probe_" + name, [&] { return uniform_constant_probe(parse_probe(name), sc); });
      s["probes"][name] = {{"eps", pr.eps}, {"constants", pr.constants}, {"dispersion", pr.dispersion}};
      for (std::size_t i = 0; i < pr.eps.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", pr.eps[i], pr.constants[i]);
        pcsv << name << ',' << buf << '\n';
      }
    }
    ctx.write("probes.csv", pcsv.str());
  }
  ctx.summary = s;
  if (!rep.complete) throw Error(ErrorKind::SolverDivergence, "sweep incomplete: " + rep.failure);
}

void run_validate_cmd(Context& ctx) {
  const CoefficientSet cs = family_of(ctx.cfg);
  const CoefficientValidation v = validate(cs);
  ctx.summary = {{"valid", v.ok},
                 {"family", cs.family},
                 {"d", cs.d},
                 {"m", cs.m},
                 {"mu", cs.mu},
                 {"kappa", cs.kappa},
                 {"lambda0", estimate_lambda0(cs)},
                 {"ellipticity_margin", v.ellipticity_margin},
                 {"periodicity_defect", v.periodicity_defect},
                 {"bound_excess", v.bound_excess},
                 {"symmetry_defect", v.symmetry_defect},
                 {"problems", v.problems}};
  if (!v.ok) throw Error(ErrorKind::InvalidArgument, "coefficient validation failed");
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::ResolutionGuard: return "resolution_guard";
    case ErrorKind::Solvability: return "solvability";
    case ErrorKind::SolverDivergence: return "solver_divergence";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace

std::string resolve_output_dir(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (opts.out && !opts.out->empty()) return *opts.out;
  if (cfg.output && !cfg.output->empty()) return *cfg.output;
  if (const char* env = std::getenv("HOMOG_KIT_OUT"); env != nullptr && *env != '\0') return env;
  return "homogkit_out";
}

RunManifest run_experiment(const ExperimentConfig& input, const RunOptions& opts) {
  ExperimentConfig cfg = input;
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.threads) cfg.threads = *opts.threads;
  RunManifest rm;
  if (opts.subcommand && !opts.subcommand->empty()) {
    if (!cfg.subcommand.empty() && cfg.subcommand != *opts.subcommand && *opts.subcommand != "validate") {
      rm.error = ErrorKind::Config;
      rm.message = "subcommand '" + *opts.subcommand + "' does not match the config's '" + cfg.subcommand + "'";
    }
    if (*opts.subcommand != "validate" || cfg.subcommand.empty()) cfg.subcommand = *opts.subcommand;
  }
  if (!rm.error && cfg.subcommand.empty()) {
    rm.error = ErrorKind::Config;
    rm.message = "no subcommand given";
  }
  const std::string sub = opts.subcommand && *opts.subcommand == "validate" ? "validate" : cfg.subcommand;

  Context ctx(cfg, fs::path(resolve_output_dir(cfg, opts)));
  std::error_code ec;
  fs::create_directories(ctx.dir, ec);
  if (ec) {
    rm.error = ErrorKind::Io;
    rm.message = "cannot create output directory " + ctx.dir.string() + ": " + ec.message();
    rm.manifest = {{"status", "failed"}, {"error", rm.message}};
    return rm;
  }

  const auto t0 = Clock::now();
  if (!rm.error) {
    try {
      if (sub == "cell")
        run_cell_cmd(ctx, true);
      else if (sub == "homogenize")
        run_cell_cmd(ctx, false);
      else if (sub == "solve")
        run_solve_cmd(ctx);
      else if (sub == "correctors")
        run_correctors_cmd(ctx);
      else if (sub == "green")
        run_green_cmd(ctx);
      else if (sub == "rates")
        run_rates_cmd(ctx);
      else if (sub == "validate")
        run_validate_cmd(ctx);
      else
        throw Error(ErrorKind::Config, "unknown subcommand '" + sub + "'");
      rm.ok = !ctx.partial;
    } catch (const Error& e) {
      rm.error = e.kind();
      rm.message = sub + ": " + e.what();
    } catch (const std::exception& e) {
      rm.error = ErrorKind::InvalidArgument;
      rm.message = sub + ": internal error: " + e.what();
    }
  }
  ctx.wall["total"] = std::chrono::duration<double>(Clock::now() - t0).count();

  // Summary first, so checks and the manifest see exactly what was written.
  if (!ctx.summary.empty()) {
    try {
      ctx.write(sub + ".json", ctx.summary.dump(2) + "\n");
    } catch (const Error& e) {
      rm.ok = false;
      if (!rm.error) {
        rm.error = e.kind();
        rm.message = e.what();
      }
    }
  }

  nlohmann::json checks = nlohmann::json::array();
  bool all_pass = true;
  // Validating a config of another subcommand does not evaluate that subcommand's checks.
  const bool skip_checks = (sub == "validate" && cfg.subcommand != "validate") || (rm.error && ctx.summary.empty());
  for (const auto& ch : skip_checks ? std::vector<Check>{} : cfg.checks) {
    nlohmann::json e{{"metric", ch.metric}};
    if (ch.min) e["min"] = *ch.min;
    if (ch.max) e["max"] = *ch.max;
    bool pass = false;
    const nlohmann::json::json_pointer ptr(ch.metric);
    if (ctx.summary.contains(ptr)) {
      const auto& v = ctx.summary.at(ptr);
      if (v.is_number()) {
        const double x = v.get<double>();
        e["value"] = x;
        pass = std::isfinite(x) && (!ch.min || x >= *ch.min) && (!ch.max || x <= *ch.max);
      } else if (v.is_boolean()) {
        e["value"] = v;
        const double x = v.get<bool>() ? 1.0 : 0.0;
        pass = (!ch.min || x >= *ch.min) && (!ch.max || x <= *ch.max);
      } else {
        e["note"] = "metric is not a number";
      }
    } else {
      e["note"] = "metric missing from summary";
    }
    e["pass"] = pass;
    all_pass = all_pass && pass;
    checks.push_back(e);
  }

  rm.summary = ctx.summary;
  rm.passed = rm.ok && !rm.error && all_pass && !(opts.strict && !ctx.warnings.empty());
  const std::string status = rm.error ? (ctx.partial ? "partial" : "failed") : (rm.passed ? "passed" : "checks_failed");
  rm.manifest = {{"config_hash", config_hash(cfg)},
                 {"toolkit_version", toolkit_version()},
                 {"subcommand", sub},
                 {"started_utc", utc_now()},
                 {"seed", cfg.seed},
                 {"threads", cfg.threads},
                 {"strict", opts.strict},
                 {"output_dir", ctx.dir.string()},
                 {"tolerances", {{"tol", cfg.tol}}},
                 {"wall_seconds", ctx.wall},
                 {"outputs", ctx.outputs},
                 {"warnings", ctx.warnings},
                 {"checks", checks},
                 {"status", status},
                 {"partial", ctx.partial},
                 {"passed", rm.passed},
                 {"config", config_to_json(cfg)}};
  if (rm.error) rm.manifest["error"] = {{"kind", kind_name(*rm.error)}, {"message", rm.message}};

  std::ofstream log(ctx.dir / "manifests.jsonl", std::ios::app);
  if (log) log << rm.manifest.dump() << '\n';
  if (!log) {
    rm.passed = false;
    if (!rm.error) {
      rm.error = ErrorKind::Io;
      rm.message = "cannot append to manifests.jsonl";
    }
  }
  return rm;
}

}  // namespace homog
