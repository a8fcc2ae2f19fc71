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

#include "homog/linalg.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "homog/error.hpp"

namespace homog {

namespace {

double dot(std::size_t n, const double* a, const double* b) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double nrm(std::size_t n, const double* a) { return std::sqrt(dot(n, a, a)); }

// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

KrylovReport pcg(std::size_t n, const LinearMap& A, const LinearMap& M, const Projector& project, const double* b, double* x,
                 double tol, int max_iter) {
  KrylovReport rep;
  rep.method = "pcg";
  std::vector<double> r(n), z(n), p(n), q(n);
  if (project) project(x);
  A(x, q.data());
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  if (project) project(r.data());
  const double bnorm = nrm(n, b);
  if (bnorm == 0.0) {
    std::fill(x, x + n, 0.0);
    rep.converged = true;
    return rep;
  }
  double res = nrm(n, r.data()) / bnorm;
  if (res <= tol) {
    rep.residual = res;
    rep.converged = true;
    return rep;
  }
  M(r.data(), z.data());
  if (project) project(z.data());
  p = z;
  double rz = dot(n, r.data(), z.data());
  for (int it = 1; it <= max_iter; ++it) {
    A(p.data(), q.data());
    if (project) project(q.data());
    const double pq = dot(n, p.data(), q.data());
    if (!(pq > 0.0)) {
      rep.iterations = it;
      rep.residual = res;
      return rep;
    }
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    res = nrm(n, r.data()) / bnorm;
    rep.iterations = it;
    rep.residual = res;
    if (res <= tol) {
      rep.converged = true;
      break;
    }
    M(r.data(), z.data());
    if (project) project(z.data());
    const double rz_new = dot(n, r.data(), z.data());
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return rep;
}

KrylovReport bicgstab(std::size_t n, const LinearMap& A, const LinearMap& M, const Projector& project, const double* b, double* x,
                      double tol, int max_iter) {
  KrylovReport rep;
  rep.method = "bicgstab";
  std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), y(n), s(n), zz(n), t(n);
  const double bnorm = nrm(n, b);
  if (bnorm == 0.0) {
    std::fill(x, x + n, 0.0);
    rep.converged = true;
    return rep;
  }
  if (project) project(x);
  const auto residual = [&] {
    A(x, t.data());
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - t[i];
    if (project) project(r.data());
  };
  residual();
  double res = nrm(n, r.data()) / bnorm;
  rep.residual = res;
  if (res <= tol) {
    rep.converged = true;
    return rep;
  }
  rhat = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  int restarts = 0;
  for (int it = 1; it <= max_iter; ++it) {
    rep.iterations = it;
    const double rho_new = dot(n, rhat.data(), r.data());
    if (std::abs(rho_new) < 1e-300 || std::abs(rho_new) < 1e-14 * nrm(n, rhat.data()) * nrm(n, r.data())) {
      // Shadow residual became orthogonal: restart from the true residual.
      if (++restarts > 50) break;
      residual();
      rhat = r;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      rho = alpha = omega = 1.0;
      continue;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    M(p.data(), y.data());
    if (project) project(y.data());
    A(y.data(), v.data());
    if (project) project(v.data());
    const double rv = dot(n, rhat.data(), v.data());
    if (rv == 0.0) {
      residual();
      rhat = r;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      rho = alpha = omega = 1.0;
      continue;
    }
    alpha = rho / rv;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (nrm(n, s.data()) / bnorm <= tol) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * y[i];
      residual();
      res = nrm(n, r.data()) / bnorm;
      rep.residual = res;
      if (res <= tol) {
        rep.converged = true;
        break;
      }
      rhat = r;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      rho = alpha = omega = 1.0;
      continue;
    }
    M(s.data(), zz.data());
    if (project) project(zz.data());
    A(zz.data(), t.data());
    if (project) project(t.data());
    const double tt = dot(n, t.data(), t.data());
    omega = tt > 0.0 ? dot(n, t.data(), s.data()) / tt : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * y[i] + omega * zz[i];
      r[i] = s[i] - omega * t[i];
    }
    res = nrm(n, r.data()) / bnorm;
    rep.residual = res;
    if (res <= tol) {
      // Confirm against the true residual; recurrences drift.
      residual();
      res = nrm(n, r.data()) / bnorm;
      rep.residual = res;
      if (res <= tol) {
        rep.converged = true;
        break;
      }
      rhat = r;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      rho = alpha = omega = 1.0;
      continue;
    }
    if (omega == 0.0) {
      residual();
      rhat = r;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      rho = alpha = omega = 1.0;
    }
  }
  return rep;
}

struct SpectralPreconditioner::Impl {
  Grid grid;
  std::vector<double> scale;
  double sigma = 0.0;
  int d = 0;
  std::size_t nreal = 0;     // real transform size
  std::size_t ncomplex = 0;  // torus only
  std::vector<std::size_t> map;  // transform slot -> grid point
  std::vector<double> eig;       // -Delta_h eigenvalue per spectral slot
  double norm = 1.0;
  double* rbuf = nullptr;
  double* rbuf2 = nullptr;
  fftw_complex* cbuf = nullptr;
  fftw_plan fwd = nullptr, bwd = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (rbuf) fftw_free(rbuf);
    if (rbuf2) fftw_free(rbuf2);
    if (cbuf) fftw_free(cbuf);
  }
};

SpectralPreconditioner::SpectralPreconditioner(const Grid& grid, std::vector<double> scale, double sigma)
    : impl_(std::make_unique<Impl>()) {
  Impl& I = *impl_;
  I.grid = grid;
  I.scale = std::move(scale);
  I.sigma = sigma;
  I.d = grid.dim();
  const int d = I.d;
  int n[3] = {1, 1, 1};
  const double pi = std::numbers::pi;

  if (grid.periodic()) {
    for (int k = 0; k < d; ++k) n[k] = grid.points(k);
    I.nreal = grid.size();
    I.map.resize(I.nreal);
    for (std::size_t p = 0; p < I.nreal; ++p) I.map[p] = p;
    int last = n[d - 1] / 2 + 1;
    I.ncomplex = I.nreal / static_cast<std::size_t>(n[d - 1]) * static_cast<std::size_t>(last);
    I.eig.resize(I.ncomplex);
    for (std::size_t s = 0; s < I.ncomplex; ++s) {
      std::size_t r = s;
      double e = 0.0;
      for (int k = d - 1; k >= 0; --k) {
        const int len = (k == d - 1) ? last : n[k];
        const int j = static_cast<int>(r % static_cast<std::size_t>(len));
        r /= static_cast<std::size_t>(len);
        const double h = grid.spacing(k);
        const double sn = std::sin(pi * j / n[k]);
        e += 4.0 / (h * h) * sn * sn;
      }
      I.eig[s] = e;
    }
    I.norm = 1.0 / static_cast<double>(I.nreal);
    std::lock_guard<std::mutex> lock(planner_mutex());
    I.rbuf = fftw_alloc_real(I.nreal);
    I.cbuf = fftw_alloc_complex(I.ncomplex);
    I.fwd = fftw_plan_dft_r2c(d, n, I.rbuf, I.cbuf, FFTW_ESTIMATE);
    I.bwd = fftw_plan_dft_c2r(d, n, I.cbuf, I.rbuf, FFTW_ESTIMATE);
  } else {
    for (int k = 0; k < d; ++k) n[k] = grid.cells(k) - 1;
    I.nreal = 1;
    for (int k = 0; k < d; ++k) I.nreal *= static_cast<std::size_t>(n[k]);
    I.map.resize(I.nreal);
    I.eig.resize(I.nreal);
    for (std::size_t s = 0; s < I.nreal; ++s) {
      std::size_t r = s;
      Index idx{0, 0, 0};
      double e = 0.0;
      for (int k = d - 1; k >= 0; --k) {
        const int j = static_cast<int>(r % static_cast<std::size_t>(n[k]));
        r /= static_cast<std::size_t>(n[k]);
        idx[k] = j + 1;
        const double h = grid.spacing(k);
        const double sn = std::sin(pi * (j + 1) / (2.0 * grid.cells(k)));
        e += 4.0 / (h * h) * sn * sn;
      }
      I.map[s] = grid.flat(idx);
      I.eig[s] = e;
    }
    I.norm = 1.0;
    for (int k = 0; k < d; ++k) I.norm /= 2.0 * grid.cells(k);
    fftw_r2r_kind kinds[3] = {FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00};
    std::lock_guard<std::mutex> lock(planner_mutex());
    I.rbuf = fftw_alloc_real(I.nreal);
    I.rbuf2 = fftw_alloc_real(I.nreal);
    I.fwd = fftw_plan_r2r(d, n, I.rbuf, I.rbuf2, kinds, FFTW_ESTIMATE);
    I.bwd = fftw_plan_r2r(d, n, I.rbuf2, I.rbuf, kinds, FFTW_ESTIMATE);
  }
  require(I.fwd != nullptr && I.bwd != nullptr, ErrorKind::InvalidArgument, "FFTW could not plan the preconditioner");
}

SpectralPreconditioner::~SpectralPreconditioner() = default;

void SpectralPreconditioner::apply(const double* in, double* out) const {
  const Impl& I = *impl_;
  const std::size_t M = I.scale.size();
  const std::size_t N = I.grid.size();
  std::fill(out, out + N * M, 0.0);
  for (std::size_t c = 0; c < M; ++c) {
    const double s = I.scale[c];
    for (std::size_t k = 0; k < I.nreal; ++k) I.rbuf[k] = in[I.map[k] * M + c];
    if (I.grid.periodic()) {
      fftw_execute_dft_r2c(I.fwd, I.rbuf, I.cbuf);
      for (std::size_t k = 0; k < I.ncomplex; ++k) {
        const double denom = s * I.eig[k] + I.sigma;
        const double f = denom > 0.0 ? I.norm / denom : 0.0;
        I.cbuf[k][0] *= f;
        I.cbuf[k][1] *= f;
      }
      fftw_execute_dft_c2r(I.bwd, I.cbuf, I.rbuf);
    } else {
      fftw_execute_r2r(I.fwd, I.rbuf, I.rbuf2);
      for (std::size_t k = 0; k < I.nreal; ++k) I.rbuf2[k] *= I.norm / (s * I.eig[k] + I.sigma);
      fftw_execute_r2r(I.bwd, I.rbuf2, I.rbuf);
    }
    for (std::size_t k = 0; k < I.nreal; ++k) out[I.map[k] * M + c] = I.rbuf[k];
  }
}

void remove_mean(GridFunction& u) {
  const std::size_t N = u.grid().size();
  for (int c = 0; c < u.components(); ++c) {
    double s = 0.0;
    for (std::size_t p = 0; p < N; ++p) s += u(p, c);
    s /= static_cast<double>(N);
    for (std::size_t p = 0; p < N; ++p) u(p, c) -= s;
  }
}

KrylovReport solve_linear(const FluxOperator& op, const GridFunction& rhs, GridFunction& x, const SolveOptions& opts) {
  const Grid& g = op.grid();
  const int m = op.components();
  require(rhs.grid().same_shape(g) && rhs.components() == m && x.grid().same_shape(g) && x.components() == m,
          ErrorKind::DimensionMismatch, "solve: right-hand side or unknown does not match the operator");
  require(opts.tol > 0.0, ErrorKind::InvalidArgument, "solve: tolerance must be positive");
  require(rhs.all_finite(), ErrorKind::InvalidArgument, "solve: non-finite right-hand side");
  const std::size_t M = static_cast<std::size_t>(m);
  const std::size_t n = g.size() * M;

  int cap = opts.max_iter;
  if (cap <= 0) {
    if (g.periodic()) {
      cap = static_cast<int>(20.0 * std::pow(static_cast<double>(g.points(0)), g.dim() / 2.0));
    } else {
      cap = 50 * g.cells(0);
    }
  }

  // Split off the Dirichlet data: x = xb + w with w = 0 on the boundary.
  std::vector<double> b(rhs.values().begin(), rhs.values().end());
  std::vector<double> xb(n, 0.0);
  std::vector<std::size_t> boundary;
  if (!g.periodic()) {
    for (std::size_t p = 0; p < g.size(); ++p)
      if (g.is_boundary(p)) boundary.push_back(p);
    for (std::size_t p : boundary)
      for (std::size_t c = 0; c < M; ++c) xb[p * M + c] = x.values()[p * M + c];
    std::vector<double> t(n);
    op.apply(xb.data(), t.data());
    for (std::size_t i = 0; i < n; ++i) b[i] -= t[i];
  }

  Projector project;
  if (!g.periodic()) {
    project = [&boundary, M](double* v) {
      for (std::size_t p : boundary)
        for (std::size_t c = 0; c < M; ++c) v[p * M + c] = 0.0;
    };
  } else if (opts.mean_zero) {
    const std::size_t N = g.size();
    project = [N, M](double* v) {
      for (std::size_t c = 0; c < M; ++c) {
        double s = 0.0;
        for (std::size_t p = 0; p < N; ++p) s += v[p * M + c];
        s /= static_cast<double>(N);
        for (std::size_t p = 0; p < N; ++p) v[p * M + c] -= s;
      }
    };
  }
  if (project) project(b.data());

  const double sigma = (g.periodic() && opts.mean_zero) ? 0.0 : op.reaction_shift();
  SpectralPreconditioner pre(g, op.diffusion_scale(), sigma);
  const LinearMap A = [&op](const double* in, double* out) { op.apply(in, out); };
  const LinearMap Mi = [&pre](const double* in, double* out) { pre.apply(in, out); };

  std::vector<double> w(x.values().begin(), x.values().end());
  KrylovReport rep;
  if (op.self_adjoint() && !opts.force_nonsymmetric) {
    rep = pcg(n, A, Mi, project, b.data(), w.data(), opts.tol, cap);
    if (!rep.converged) {
      // Indefinite shifts can stall CG; fall back to the nonsymmetric solver.
      std::vector<double> w2(x.values().begin(), x.values().end());
      KrylovReport alt = bicgstab(n, A, Mi, project, b.data(), w2.data(), opts.tol, cap);
      if (alt.converged) {
        alt.iterations += rep.iterations;
        rep = alt;
        w = std::move(w2);
      }
    }
  } else {
    rep = bicgstab(n, A, Mi, project, b.data(), w.data(), opts.tol, cap);
  }
  if (!rep.converged) {
    std::ostringstream os;
    os << rep.method << " did not converge on " << g.describe() << " within " << cap << " iterations (relative residual "
       << rep.residual << ")";
    throw SolverError(os.str(), rep.residual, rep.iterations);
  }
  for (std::size_t i = 0; i < n; ++i) x.values()[i] = w[i] + xb[i];
  return rep;
}

GridFunction solve_periodic_poisson(const GridFunction& f, double tol) {
  const Grid& g = f.grid();
  require(g.periodic(), ErrorKind::InvalidArgument, "periodic Poisson solve needs a torus grid");
  const int d = g.dim();
  // -Delta_h pi = -f with unit diffusion, solved in the mean-zero subspace.
  GridFunction out(g, f.components());
  for (int c = 0; c < f.components(); ++c) {
    SampledCoefficients s = SampledCoefficients::zeros(g, 1);
    for (std::size_t p = 0; p < g.size(); ++p)
      for (int i = 0; i < d; ++i) s.A(p, i * d + i) = 1.0;
    FluxOperator lap(std::move(s), 0.0);
    GridFunction rhs = f.components_slice(c, 1);
    rhs *= -1.0;
    GridFunction x(g, 1);
    SolveOptions o;
    o.tol = tol;
    o.mean_zero = true;
    if (rhs.max_abs() > 0.0) solve_linear(lap, rhs, x, o);
    remove_mean(x);
    out.set_components(c, x);
  }
  return out;
}

}  // namespace homog
