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

#include "homog/operator.hpp"

#include <algorithm>
#include <cmath>

#include "homog/error.hpp"

namespace homog {

SampledCoefficients SampledCoefficients::zeros(const Grid& grid, int m) {
  const int d = grid.dim();
  SampledCoefficients s;
  s.d = d;
  s.m = m;
  s.A = GridFunction(grid, m * m * d * d);
  s.V = GridFunction(grid, m * m * d);
  s.B = GridFunction(grid, m * m * d);
  s.c = GridFunction(grid, m * m);
  return s;
}

SampledCoefficients SampledCoefficients::constant(const Grid& grid, int m, const std::vector<double>& A,
                                                  const std::vector<double>& V, const std::vector<double>& B,
                                                  const std::vector<double>& c) {
  SampledCoefficients s = zeros(grid, m);
  const auto fill = [&](GridFunction& f, const std::vector<double>& v, const char* name) {
    if (v.empty()) return;
    require(static_cast<int>(v.size()) == f.components(), ErrorKind::DimensionMismatch,
            std::string("constant coefficient ") + name + " has the wrong size");
    for (std::size_t p = 0; p < grid.size(); ++p)
      for (int k = 0; k < f.components(); ++k) f(p, k) = v[static_cast<std::size_t>(k)];
  };
  fill(s.A, A, "A");
  fill(s.V, V, "V");
  fill(s.B, B, "B");
  fill(s.c, c, "c");
  return s;
}

SampledCoefficients SampledCoefficients::transposed() const {
  SampledCoefficients t = zeros(A.grid(), m);
  const Grid& g = A.grid();
  for (std::size_t p = 0; p < g.size(); ++p) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) t.A(p, ((i * d + j) * m + a) * m + b) = A(p, ((j * d + i) * m + b) * m + a);
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          t.V(p, (i * m + a) * m + b) = B(p, (i * m + b) * m + a);
          t.B(p, (i * m + a) * m + b) = V(p, (i * m + b) * m + a);
        }
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) t.c(p, a * m + b) = c(p, b * m + a);
  }
  return t;
}

bool SampledCoefficients::all_finite() const {
  return A.all_finite() && V.all_finite() && B.all_finite() && c.all_finite();
}

namespace {

bool nearly_equal(double x, double y) { return std::abs(x - y) <= 1e-14 * std::max({1.0, std::abs(x), std::abs(y)}); }

bool is_zero(const GridFunction& f) { return f.max_abs() == 0.0; }

}  // namespace

FluxOperator::FluxOperator(SampledCoefficients coeffs, double lambda)
    : grid_(coeffs.A.grid()), coeffs_(std::move(coeffs)), d_(coeffs_.d), m_(coeffs_.m), lambda_(lambda) {
  const int d = d_, m = m_;
  require(d == grid_.dim() && m >= 1, ErrorKind::DimensionMismatch, "coefficient samples do not match the grid");
  require(coeffs_.A.components() == m * m * d * d && coeffs_.V.components() == m * m * d && coeffs_.B.components() == m * m * d &&
              coeffs_.c.components() == m * m,
          ErrorKind::DimensionMismatch, "coefficient samples have inconsistent component counts");
  require(coeffs_.V.grid().same_shape(grid_) && coeffs_.B.grid().same_shape(grid_) && coeffs_.c.grid().same_shape(grid_),
          ErrorKind::DimensionMismatch, "coefficient samples live on different grids");
  require(coeffs_.all_finite() && std::isfinite(lambda), ErrorKind::InvalidArgument, "non-finite coefficient sample");

  const std::size_t N = grid_.size();
  for (std::size_t p = 0; p < N; ++p)
    if (!grid_.is_boundary(p)) active_.push_back(p);

  for (int k = 0; k < d; ++k) {
    plus_[k].resize(N);
    minus_[k].resize(N);
    for (std::size_t p = 0; p < N; ++p) {
      const Index i = grid_.index(p);
      if (grid_.periodic()) {
        plus_[k][p] = grid_.neighbor(p, k, 1);
        minus_[k][p] = grid_.neighbor(p, k, -1);
      } else {
        plus_[k][p] = i[k] < grid_.cells(k) ? p + static_cast<std::size_t>(grid_.stride(k)) : p;
        minus_[k][p] = i[k] > 0 ? p - static_cast<std::size_t>(grid_.stride(k)) : p;
      }
    }
  }

  const std::size_t mm = static_cast<std::size_t>(m * m);
  for (int i = 0; i < d; ++i) {
    abar_[i].assign(N * mm, 0.0);
    vbar_[i].assign(N * mm, 0.0);
    bbar_[i].assign(N * mm, 0.0);
    for (std::size_t p = 0; p < N; ++p) {
      const std::size_t q = plus_[i][p];
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          const int ka = ((i * d + i) * m + a) * m + b;
          const int kv = (i * m + a) * m + b;
          const std::size_t o = p * mm + static_cast<std::size_t>(a * m + b);
          abar_[i][o] = 0.5 * (coeffs_.A(p, ka) + coeffs_.A(q, ka));
          vbar_[i][o] = 0.5 * (coeffs_.V(p, kv) + coeffs_.V(q, kv));
          bbar_[i][o] = 0.5 * (coeffs_.B(p, kv) + coeffs_.B(q, kv));
        }
    }
  }

  for (std::size_t p = 0; p < N && !has_cross_; ++p)
    for (int i = 0; i < d && !has_cross_; ++i)
      for (int j = 0; j < d && !has_cross_; ++j)
        if (i != j)
          for (int ab = 0; ab < m * m; ++ab)
            if (coeffs_.A(p, (i * d + j) * m * m + ab) != 0.0) {
              has_cross_ = true;
              break;
            }
  has_V_ = !is_zero(coeffs_.V);
  has_B_ = !is_zero(coeffs_.B);
  has_c_ = !is_zero(coeffs_.c);

  bool sym = true;
  for (std::size_t p = 0; p < N && sym; ++p) {
    for (int i = 0; i < d && sym; ++i)
      for (int j = 0; j < d && sym; ++j)
        for (int a = 0; a < m && sym; ++a)
          for (int b = 0; b < m && sym; ++b)
            sym = nearly_equal(coeffs_.A(p, ((i * d + j) * m + a) * m + b), coeffs_.A(p, ((j * d + i) * m + b) * m + a));
    for (int i = 0; i < d && sym; ++i)
      for (int a = 0; a < m && sym; ++a)
        for (int b = 0; b < m && sym; ++b) sym = nearly_equal(coeffs_.V(p, (i * m + a) * m + b), coeffs_.B(p, (i * m + b) * m + a));
    for (int a = 0; a < m && sym; ++a)
      for (int b = 0; b < m && sym; ++b) sym = nearly_equal(coeffs_.c(p, a * m + b), coeffs_.c(p, b * m + a));
  }
  self_adjoint_ = sym;
}

void FluxOperator::apply(const double* u, double* out, unsigned terms, const double* off) const {
  const int d = d_, m = m_;
  const std::size_t M = static_cast<std::size_t>(m), mm = M * M;
  std::fill(out, out + grid_.size() * M, 0.0);
  const bool principal = terms & kPrincipal;
  const bool drift = (terms & kDrift) && has_V_;
  const bool adv = (terms & kAdvection) && has_B_;
  const bool react = terms & kReaction;
  const double* A = coeffs_.A.values().data();
  const double* C = coeffs_.c.values().data();
  const std::size_t nA = static_cast<std::size_t>(m * m * d * d);

  for (std::size_t p : active_) {
    double* o = out + p * M;
    for (int i = 0; i < d; ++i) {
      const double h = grid_.spacing(i);
      const std::size_t pp = plus_[i][p], pm = minus_[i][p];
      const double* ap = &abar_[i][p * mm];
      const double* am = &abar_[i][pm * mm];
      for (int b = 0; b < m; ++b) {
        const double g = off ? off[b * d + i] : 0.0;
        const double dplus = (u[pp * M + b] - u[p * M + b]) / h + g;
        const double dminus = (u[p * M + b] - u[pm * M + b]) / h + g;
        for (int a = 0; a < m; ++a) {
          const std::size_t ab = static_cast<std::size_t>(a * m + b);
          double acc = 0.0;
          if (principal) acc -= (ap[ab] * dplus - am[ab] * dminus) / h;
          if (drift) {
            const double up = 0.5 * (u[p * M + b] + u[pp * M + b]);
            const double um = 0.5 * (u[pm * M + b] + u[p * M + b]);
            acc -= (vbar_[i][p * mm + ab] * up - vbar_[i][pm * mm + ab] * um) / h;
          }
          if (adv) acc += 0.5 * (bbar_[i][p * mm + ab] * dplus + bbar_[i][pm * mm + ab] * dminus);
          o[a] += acc;
        }
      }
      if (principal && has_cross_) {
        for (int j = 0; j < d; ++j) {
          if (j == i) continue;
          const double hj = grid_.spacing(j);
          const std::size_t blk = static_cast<std::size_t>((i * d + j) * m * m);
          for (int b = 0; b < m; ++b) {
            const double g = off ? off[b * d + j] : 0.0;
            const double gp = (u[plus_[j][pp] * M + b] - u[minus_[j][pp] * M + b]) / (2.0 * hj) + g;
            const double gm = (u[plus_[j][pm] * M + b] - u[minus_[j][pm] * M + b]) / (2.0 * hj) + g;
            for (int a = 0; a < m; ++a) {
              const std::size_t ab = blk + static_cast<std::size_t>(a * m + b);
              o[a] -= (A[pp * nA + ab] * gp - A[pm * nA + ab] * gm) / (2.0 * h);
            }
          }
        }
      }
    }
    if (react) {
      for (int a = 0; a < m; ++a) {
        double acc = lambda_ * u[p * M + a];
        if (has_c_)
          for (int b = 0; b < m; ++b) acc += C[p * mm + static_cast<std::size_t>(a * m + b)] * u[p * M + b];
        o[a] += acc;
      }
    }
  }
}

GridFunction FluxOperator::apply(const GridFunction& u, unsigned terms) const {
  require(u.grid().same_shape(grid_) && u.components() == m_, ErrorKind::DimensionMismatch, "operator input does not match its grid");
  GridFunction out(grid_, m_);
  apply(u.values().data(), out.values().data(), terms);
  return out;
}

GridFunction FluxOperator::principal_flux(const GridFunction& u, const double* off) const {
  require(grid_.periodic(), ErrorKind::InvalidArgument, "node fluxes are defined on the torus only");
  require(u.grid().same_shape(grid_) && u.components() == m_, ErrorKind::DimensionMismatch, "flux input does not match its grid");
  const int d = d_, m = m_;
  const std::size_t mm = static_cast<std::size_t>(m * m);
  GridFunction out(grid_, m * d);
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    for (int i = 0; i < d; ++i) {
      const double h = grid_.spacing(i);
      const std::size_t pp = plus_[i][p], pm = minus_[i][p];
      for (int b = 0; b < m; ++b) {
        const double g = off ? off[b * d + i] : 0.0;
        const double dplus = (u(pp, b) - u(p, b)) / h + g;
        const double dminus = (u(p, b) - u(pm, b)) / h + g;
        for (int a = 0; a < m; ++a) {
          const std::size_t ab = static_cast<std::size_t>(a * m + b);
          out(p, a * d + i) += 0.5 * (abar_[i][p * mm + ab] * dplus + abar_[i][pm * mm + ab] * dminus);
        }
      }
      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        const double hj = grid_.spacing(j);
        for (int b = 0; b < m; ++b) {
          const double g = off ? off[b * d + j] : 0.0;
          const double gc = (u(plus_[j][p], b) - u(minus_[j][p], b)) / (2.0 * hj) + g;
          for (int a = 0; a < m; ++a) out(p, a * d + i) += coeffs_.A(p, ((i * d + j) * m + a) * m + b) * gc;
        }
      }
    }
  }
  return out;
}

GridFunction FluxOperator::advection(const GridFunction& u, const double* off) const {
  require(grid_.periodic(), ErrorKind::InvalidArgument, "node fluxes are defined on the torus only");
  GridFunction out(grid_, m_);
  apply(u.values().data(), out.values().data(), kAdvection, off);
  return out;
}

FluxOperator FluxOperator::adjoint() const { return FluxOperator(coeffs_.transposed(), lambda_); }

std::vector<double> FluxOperator::diffusion_scale() const {
  const int d = d_, m = m_;
  std::vector<double> s(static_cast<std::size_t>(m), 0.0);
  for (std::size_t p = 0; p < grid_.size(); ++p)
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < d; ++i) s[static_cast<std::size_t>(a)] += coeffs_.A(p, ((i * d + i) * m + a) * m + a);
  for (double& v : s) v = std::max(v / static_cast<double>(grid_.size() * static_cast<std::size_t>(d)), 1e-12);
  return s;
}

double FluxOperator::reaction_shift() const {
  double s = 0.0;
  for (std::size_t p = 0; p < grid_.size(); ++p)
    for (int a = 0; a < m_; ++a) s += coeffs_.c(p, a * m_ + a);
  s = s / static_cast<double>(grid_.size() * static_cast<std::size_t>(m_)) + lambda_;
  return std::max(s, 0.0);
}

GridFunction divergence_form_apply(const GridFunction& A_samples, const GridFunction& u) {
  const Grid& g = u.grid();
  const int d = g.dim();
  const int m = u.components();
  require(A_samples.grid().same_shape(g), ErrorKind::DimensionMismatch, "coefficient samples live on a different grid");
  require(A_samples.components() == m * m * d * d, ErrorKind::DimensionMismatch, "A needs m*m*d*d components");
  require(A_samples.all_finite(), ErrorKind::InvalidArgument, "non-finite coefficient sample");
  SampledCoefficients s = SampledCoefficients::zeros(g, m);
  s.A = A_samples;
  return FluxOperator(std::move(s), 0.0).apply(u, kPrincipal);
}

}  // namespace homog
