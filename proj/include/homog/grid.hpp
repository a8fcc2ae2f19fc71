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

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace homog {

using Point = std::array<double, 3>;
using Index = std::array<int, 3>;

enum class Topology { Torus, Box };

/// Uniform structured grid, either the periodic unit cell [0,1)^d or an
/// axis-aligned box [0,L_0] x ... x [0,L_{d-1}] with Dirichlet boundary.
///
/// Points are stored row-major: the last axis varies fastest. On a box the
/// point count per axis is cells+1 (boundary included); on the torus it is n.
class Grid {
 public:
  Grid() = default;

  static Grid torus(int dim, int n);
  static Grid box(int dim, std::array<double, 3> extent, std::array<int, 3> cells);
  /// Unit box [0,1]^d with the same number of cells on every axis.
  static Grid unit_box(int dim, int cells);

  int dim() const noexcept { return dim_; }
  Topology topology() const noexcept { return topo_; }
  bool periodic() const noexcept { return topo_ == Topology::Torus; }

  int points(int axis) const noexcept { return points_[axis]; }
  int cells(int axis) const noexcept { return cells_[axis]; }
  double spacing(int axis) const noexcept { return h_[axis]; }
  double extent(int axis) const noexcept { return extent_[axis]; }
  /// Largest spacing over the axes.
  double max_spacing() const noexcept;
  std::size_t size() const noexcept { return size_; }
  std::ptrdiff_t stride(int axis) const noexcept { return stride_[axis]; }
  double diameter() const noexcept;
  double volume() const noexcept;

  Index index(std::size_t p) const noexcept;
  std::size_t flat(const Index& i) const noexcept;
  Point coords(std::size_t p) const noexcept;

  /// Neighbor along `axis` at offset +-1 (wraps on the torus). Only valid
  /// for box points where the neighbor exists.
  std::size_t neighbor(std::size_t p, int axis, int offset) const noexcept;

  bool is_boundary(std::size_t p) const noexcept;
  /// Exact Euclidean distance to the box boundary (closed form). The torus
  /// has no boundary and returns +infinity.
  double boundary_distance(const Point& x) const noexcept;
  double boundary_distance(std::size_t p) const noexcept { return boundary_distance(coords(p)); }
  /// Quadrature weight: h^d on the torus, trapezoid (dual-cell) weight on a box.
  double weight(std::size_t p) const noexcept;

  bool same_shape(const Grid& other) const noexcept;
  std::string describe() const;

 private:
  Grid(Topology topo, int dim, std::array<double, 3> extent, std::array<int, 3> cells);

  Topology topo_ = Topology::Torus;
  int dim_ = 0;
  std::array<int, 3> points_{1, 1, 1};
  std::array<int, 3> cells_{1, 1, 1};
  std::array<double, 3> h_{1.0, 1.0, 1.0};
  std::array<double, 3> extent_{1.0, 1.0, 1.0};
  std::array<std::ptrdiff_t, 3> stride_{0, 0, 0};
  std::size_t size_ = 0;
};

/// Point samples of an `ncomp`-valued field; storage is point-major.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Grid grid, int ncomp, double fill = 0.0);

  template <class F>
  static GridFunction sample(const Grid& grid, int ncomp, F&& f) {
    GridFunction out(grid, ncomp);
    std::vector<double> buf(static_cast<std::size_t>(ncomp));
    for (std::size_t p = 0; p < grid.size(); ++p) {
      f(grid.coords(p), std::span<double>(buf));
      for (int c = 0; c < ncomp; ++c) out(p, c) = buf[static_cast<std::size_t>(c)];
    }
    return out;
  }
  /// Scalar convenience: f(x) -> double.
  static GridFunction sample_scalar(const Grid& grid, const std::function<double(const Point&)>& f);

  const Grid& grid() const noexcept { return grid_; }
  int components() const noexcept { return ncomp_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t p, int c) noexcept { return data_[p * static_cast<std::size_t>(ncomp_) + static_cast<std::size_t>(c)]; }
  double operator()(std::size_t p, int c) const noexcept { return data_[p * static_cast<std::size_t>(ncomp_) + static_cast<std::size_t>(c)]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }

  /// Extracts a contiguous block of components [first, first+count).
  GridFunction components_slice(int first, int count) const;
  void set_components(int first, const GridFunction& block);

  bool all_finite() const noexcept;
  double max_abs() const noexcept;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double s);
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { a -= b; return a; }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { a += b; return a; }

 private:
  Grid grid_;
  int ncomp_ = 0;
  std::vector<double> data_;
};

enum class NormKind { Lp, W1p, Holder, Linf, H1 };

/// Which norm to evaluate. `exponent` is p for Lp/W1p and sigma for Holder.
struct NormSpec {
  NormKind kind = NormKind::Linf;
  double exponent = 0.0;

  static NormSpec Lp(double p);
  static NormSpec W1p(double p);
  static NormSpec Holder(double sigma);
  static NormSpec Linf() { return {NormKind::Linf, 0.0}; }
  static NormSpec H1() { return {NormKind::H1, 2.0}; }
  void validate() const;
};

/// Restricts norm evaluation to points with boundary distance >= min_distance.
struct Region {
  double min_distance = 0.0;
  bool contains(const Grid& g, const Point& x) const noexcept {
    return min_distance <= 0.0 || g.boundary_distance(x) >= min_distance;
  }
};

/// Second-order centered differences; periodic wrap on the torus and
/// second-order one-sided stencils at box boundaries. Component layout of
/// the result: c*d + k holds d/dx_k of component c.
GridFunction gradient(const GridFunction& u);

/// Discrete -div(A grad u) in flux form. `A_samples` has m*m*d*d components
/// indexed ((i*d + j)*m + alpha)*m + beta; u has m components. Box boundary
/// rows are returned as zero.
GridFunction divergence_form_apply(const GridFunction& A_samples, const GridFunction& u);

/// Pointwise Euclidean magnitude over all components.
double norm(const GridFunction& u, const NormSpec& spec, const Region& region = {});
/// Weighted inner product sum_p w_p u(p).v(p).
double inner(const GridFunction& u, const GridFunction& v);
/// Holder seminorm on a deterministic stratified sample of at most 1e4 pairs.
double holder_seminorm(const GridFunction& u, double sigma, const Region& region = {});
/// Discrete H1 norm (||u||_2^2 + sum_k ||D_k^+ u||_2^2)^{1/2} from edge differences.
double h1_norm(const GridFunction& u, const Region& region = {});
/// Per-component cell average (trapezoid weights on boxes).
std::vector<double> mean(const GridFunction& u);

/// Nontangential maximal function on the boundary points of a box grid.
struct MaximalFunction {
  GridFunction values;              ///< one value per grid point; only boundary entries are meaningful
  std::vector<std::size_t> boundary;  ///< boundary point indices in grid order
  int widened = 0;                  ///< boundary points whose cone was empty and got widened
};
MaximalFunction nontangential_max(const GridFunction& u, double N0);

/// L^p norm over the boundary of a box, trapezoid surface quadrature.
double boundary_lp_norm(const GridFunction& u, double p);

/// CSV: header "dim,n_per_axis,components", a line with those values, then
/// one row per point (row-major), full round-trip precision.
void write_csv(std::ostream& os, const GridFunction& u);
GridFunction read_csv(std::istream& is, const Grid& grid);
void write_binary(std::ostream& os, const GridFunction& u);
GridFunction read_binary(std::istream& is, const Grid& grid);

}  // namespace homog
