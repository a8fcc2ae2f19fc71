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

#include "homog/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "homog/error.hpp"

namespace homog {

Grid::Grid(Topology topo, int dim, std::array<double, 3> extent, std::array<int, 3> cells) : topo_(topo), dim_(dim) {
  require(dim >= 1 && dim <= 3, ErrorKind::InvalidArgument, "grid dimension must be 1, 2 or 3");
  for (int k = 0; k < 3; ++k) {
    if (k < dim) {
      require(cells[k] >= 4, ErrorKind::InvalidArgument, "grid needs at least 4 points per axis");
      require(extent[k] > 0.0 && std::isfinite(extent[k]), ErrorKind::InvalidArgument, "grid extent must be positive");
      cells_[k] = cells[k];
      extent_[k] = extent[k];
      points_[k] = topo == Topology::Torus ? cells[k] : cells[k] + 1;
      h_[k] = topo == Topology::Torus ? 1.0 / cells[k] : extent[k] / cells[k];
    } else {
      cells_[k] = 1;
      points_[k] = 1;
      h_[k] = 1.0;
      extent_[k] = 1.0;
    }
  }
  std::ptrdiff_t s = 1;
  for (int k = 2; k >= 0; --k) {
    stride_[k] = s;
    s *= points_[k];
  }
  size_ = static_cast<std::size_t>(s);
}

Grid Grid::torus(int dim, int n) { return Grid(Topology::Torus, dim, {1.0, 1.0, 1.0}, {n, n, n}); }

Grid Grid::box(int dim, std::array<double, 3> extent, std::array<int, 3> cells) {
  return Grid(Topology::Box, dim, extent, cells);
}

Grid Grid::unit_box(int dim, int cells) { return box(dim, {1.0, 1.0, 1.0}, {cells, cells, cells}); }

double Grid::max_spacing() const noexcept {
  double h = 0.0;
  for (int k = 0; k < dim_; ++k) h = std::max(h, h_[k]);
  return h;
}

double Grid::diameter() const noexcept {
  double s = 0.0;
  for (int k = 0; k < dim_; ++k) s += extent_[k] * extent_[k];
  return std::sqrt(s);
}

double Grid::volume() const noexcept {
  double v = 1.0;
  for (int k = 0; k < dim_; ++k) v *= extent_[k];
  return v;
}

Index Grid::index(std::size_t p) const noexcept {
  Index i{0, 0, 0};
  auto r = static_cast<std::ptrdiff_t>(p);
  for (int k = 0; k < 3; ++k) {
    i[k] = static_cast<int>(r / stride_[k]);
    r %= stride_[k];
  }
  return i;
}

std::size_t Grid::flat(const Index& i) const noexcept {
  std::ptrdiff_t p = 0;
  for (int k = 0; k < 3; ++k) p += static_cast<std::ptrdiff_t>(i[k]) * stride_[k];
  return static_cast<std::size_t>(p);
}

Point Grid::coords(std::size_t p) const noexcept {
  const Index i = index(p);
  Point x{0.0, 0.0, 0.0};
  for (int k = 0; k < dim_; ++k) x[k] = i[k] * h_[k];
  return x;
}

std::size_t Grid::neighbor(std::size_t p, int axis, int offset) const noexcept {
  const Index i = index(p);
  int j = i[axis] + offset;
  if (topo_ == Topology::Torus) j = ((j % points_[axis]) + points_[axis]) % points_[axis];
  return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(p) + (j - i[axis]) * stride_[axis]);
}

bool Grid::is_boundary(std::size_t p) const noexcept {
  if (topo_ == Topology::Torus) return false;
  const Index i = index(p);
  for (int k = 0; k < dim_; ++k)
    if (i[k] == 0 || i[k] == cells_[k]) return true;
  return false;
}

double Grid::boundary_distance(const Point& x) const noexcept {
  if (topo_ == Topology::Torus) return std::numeric_limits<double>::infinity();
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < dim_; ++k) d = std::min({d, x[k], extent_[k] - x[k]});
  return std::max(d, 0.0);
}

double Grid::weight(std::size_t p) const noexcept {
  double w = 1.0;
  if (topo_ == Topology::Torus) {
    for (int k = 0; k < dim_; ++k) w *= h_[k];
    return w;
  }
  const Index i = index(p);
  for (int k = 0; k < dim_; ++k) w *= (i[k] == 0 || i[k] == cells_[k]) ? 0.5 * h_[k] : h_[k];
  return w;
}

bool Grid::same_shape(const Grid& o) const noexcept {
  if (topo_ != o.topo_ || dim_ != o.dim_) return false;
  for (int k = 0; k < dim_; ++k)
    if (cells_[k] != o.cells_[k] || extent_[k] != o.extent_[k]) return false;
  return true;
}

std::string Grid::describe() const {
  std::ostringstream os;
  os << (periodic() ? "torus" : "box") << " d=" << dim_ << " points=";
  for (int k = 0; k < dim_; ++k) os << (k ? "x" : "") << points_[k];
  return os.str();
}

GridFunction::GridFunction(Grid grid, int ncomp, double fill) : grid_(std::move(grid)), ncomp_(ncomp) {
  require(ncomp >= 1, ErrorKind::InvalidArgument, "grid function needs at least one component");
  data_.assign(grid_.size() * static_cast<std::size_t>(ncomp), fill);
}

GridFunction GridFunction::sample_scalar(const Grid& grid, const std::function<double(const Point&)>& f) {
  GridFunction out(grid, 1);
  for (std::size_t p = 0; p < grid.size(); ++p) out(p, 0) = f(grid.coords(p));
  return out;
}

GridFunction GridFunction::components_slice(int first, int count) const {
  require(first >= 0 && count >= 1 && first + count <= ncomp_, ErrorKind::DimensionMismatch, "component slice out of range");
  GridFunction out(grid_, count);
  for (std::size_t p = 0; p < grid_.size(); ++p)
    for (int c = 0; c < count; ++c) out(p, c) = (*this)(p, first + c);
  return out;
}

void GridFunction::set_components(int first, const GridFunction& block) {
  require(block.grid_.same_shape(grid_) && first >= 0 && first + block.ncomp_ <= ncomp_, ErrorKind::DimensionMismatch,
          "component block does not fit");
  for (std::size_t p = 0; p < grid_.size(); ++p)
    for (int c = 0; c < block.ncomp_; ++c) (*this)(p, first + c) = block(p, c);
}

bool GridFunction::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double GridFunction::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

void check_compatible(const GridFunction& a, const GridFunction& b) {
  require(a.grid().same_shape(b.grid()) && a.components() == b.components(), ErrorKind::DimensionMismatch,
          "grid functions differ in grid or component count");
}

double magnitude(const GridFunction& u, std::size_t p) {
  double s = 0.0;
  for (int c = 0; c < u.components(); ++c) s += u(p, c) * u(p, c);
  return std::sqrt(s);
}

}  // namespace

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  check_compatible(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  check_compatible(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

NormSpec NormSpec::Lp(double p) {
  NormSpec s{NormKind::Lp, p};
  s.validate();
  return s;
}

NormSpec NormSpec::W1p(double p) {
  NormSpec s{NormKind::W1p, p};
  s.validate();
  return s;
}

NormSpec NormSpec::Holder(double sigma) {
  NormSpec s{NormKind::Holder, sigma};
  s.validate();
  return s;
}

void NormSpec::validate() const {
  switch (kind) {
    case NormKind::Lp:
    case NormKind::W1p:
      // p = 1 is admitted for quadrature convenience; the open interval is the analytic range.
      require(exponent >= 1.0 && std::isfinite(exponent), ErrorKind::InvalidArgument, "norm exponent p must lie in [1, inf)");
      break;
    case NormKind::Holder:
      require(exponent > 0.0 && exponent <= 1.0, ErrorKind::InvalidArgument, "Holder exponent must lie in (0, 1]");
      break;
    case NormKind::Linf:
    case NormKind::H1:
      break;
  }
}

GridFunction gradient(const GridFunction& u) {
  const Grid& g = u.grid();
  const int d = g.dim();
  const int m = u.components();
  require(u.size() == g.size() * static_cast<std::size_t>(m), ErrorKind::DimensionMismatch, "grid function storage does not match grid");
  GridFunction out(g, m * d);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Index i = g.index(p);
    for (int k = 0; k < d; ++k) {
      const double h = g.spacing(k);
      const std::ptrdiff_t s = g.stride(k);
      const auto at = [&](std::ptrdiff_t off, int c) { return u(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(p) + off * s), c); };
      for (int c = 0; c < m; ++c) {
        double v;
        if (g.periodic()) {
          v = (u(g.neighbor(p, k, 1), c) - u(g.neighbor(p, k, -1), c)) / (2.0 * h);
        } else if (i[k] == 0) {
          v = (-3.0 * at(0, c) + 4.0 * at(1, c) - at(2, c)) / (2.0 * h);
        } else if (i[k] == g.cells(k)) {
          v = (3.0 * at(0, c) - 4.0 * at(-1, c) + at(-2, c)) / (2.0 * h);
        } else {
          v = (at(1, c) - at(-1, c)) / (2.0 * h);
        }
        out(p, c * d + k) = v;
      }
    }
  }
  return out;
}

double inner(const GridFunction& u, const GridFunction& v) {
  check_compatible(u, v);
  const Grid& g = u.grid();
  double s = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    double t = 0.0;
    for (int c = 0; c < u.components(); ++c) t += u(p, c) * v(p, c);
    s += g.weight(p) * t;
  }
  return s;
}

std::vector<double> mean(const GridFunction& u) {
  const Grid& g = u.grid();
  std::vector<double> acc(static_cast<std::size_t>(u.components()), 0.0);
  double wsum = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double w = g.weight(p);
    wsum += w;
    for (int c = 0; c < u.components(); ++c) acc[static_cast<std::size_t>(c)] += w * u(p, c);
  }
  for (double& a : acc) a /= wsum;
  return acc;
}

namespace {

double lp_norm(const GridFunction& u, double p, const Region& region) {
  const Grid& g = u.grid();
  double s = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) {
    if (!region.contains(g, g.coords(q))) continue;
    s += g.weight(q) * std::pow(magnitude(u, q), p);
  }
  return std::pow(s, 1.0 / p);
}

double linf_norm(const GridFunction& u, const Region& region) {
  const Grid& g = u.grid();
  double m = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q)
    if (region.contains(g, g.coords(q))) m = std::max(m, magnitude(u, q));
  return m;
}

}  // namespace

double h1_norm(const GridFunction& u, const Region& region) {
  const Grid& g = u.grid();
  const int d = g.dim();
  double s = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Point x = g.coords(p);
    if (!region.contains(g, x)) continue;
    s += g.weight(p) * magnitude(u, p) * magnitude(u, p);
    const Index i = g.index(p);
    for (int k = 0; k < d; ++k) {
      if (!g.periodic() && i[k] == g.cells(k)) continue;
      const std::size_t q = g.neighbor(p, k, 1);
      if (!region.contains(g, g.coords(q))) continue;
      // Edge weight: h_k along the edge, trapezoid factors across it.
      double w = 1.0;
      for (int j = 0; j < d; ++j) {
        if (j == k || g.periodic()) {
          w *= g.spacing(j);
        } else {
          w *= (i[j] == 0 || i[j] == g.cells(j)) ? 0.5 * g.spacing(j) : g.spacing(j);
        }
      }
      double e = 0.0;
      for (int c = 0; c < u.components(); ++c) {
        const double diff = (u(q, c) - u(p, c)) / g.spacing(k);
        e += diff * diff;
      }
      s += w * e;
    }
  }
  return std::sqrt(s);
}

double holder_seminorm(const GridFunction& u, double sigma, const Region& region) {
  NormSpec::Holder(sigma);
  const Grid& g = u.grid();
  const int d = g.dim();
  constexpr std::size_t kPairCap = 10000;

  // Directions: each axis and the main diagonal (d > 1); offsets are dyadic.
  std::vector<std::array<int, 3>> dirs;
  for (int k = 0; k < d; ++k) {
    std::array<int, 3> e{0, 0, 0};
    e[k] = 1;
    dirs.push_back(e);
  }
  if (d > 1) dirs.push_back({1, d > 1 ? 1 : 0, d > 2 ? 1 : 0});
  int max_points = g.points(0);
  for (int k = 1; k < d; ++k) max_points = std::min(max_points, g.points(k));
  std::vector<int> offsets;
  for (int s = 1; s < (g.periodic() ? max_points / 2 + 1 : max_points); s *= 2) offsets.push_back(s);

  const std::size_t combos = dirs.size() * offsets.size();
  const std::size_t budget = std::max<std::size_t>(1, kPairCap / std::max<std::size_t>(combos, 1));
  const std::size_t stride = std::max<std::size_t>(1, (g.size() + budget - 1) / budget);

  double best = 0.0;
  std::size_t combo = 0;
  for (const auto& dir : dirs) {
    for (int s : offsets) {
      // Shift the sampling phase per combination so strided samples cover the grid.
      const std::size_t phase = (combo++ * 7919u) % stride;
      for (std::size_t p = phase; p < g.size(); p += stride) {
        const Index i = g.index(p);
        Index j = i;
        bool inside = true;
        double dist2 = 0.0;
        for (int k = 0; k < d; ++k) {
          j[k] = i[k] + s * dir[k];
          if (g.periodic()) {
            j[k] %= g.points(k);
          } else if (j[k] > g.cells(k)) {
            inside = false;
          }
          const double dx = s * dir[k] * g.spacing(k);
          dist2 += dx * dx;
        }
        if (!inside) continue;
        const std::size_t q = g.flat(j);
        if (!region.contains(g, g.coords(p)) || !region.contains(g, g.coords(q))) continue;
        double diff = 0.0;
        for (int c = 0; c < u.components(); ++c) diff += (u(q, c) - u(p, c)) * (u(q, c) - u(p, c));
        best = std::max(best, std::sqrt(diff) / std::pow(std::sqrt(dist2), sigma));
      }
    }
  }
  return best;
}

double norm(const GridFunction& u, const NormSpec& spec, const Region& region) {
  spec.validate();
  switch (spec.kind) {
    case NormKind::Lp:
      return lp_norm(u, spec.exponent, region);
    case NormKind::Linf:
      return linf_norm(u, region);
    case NormKind::W1p: {
      const double a = lp_norm(u, spec.exponent, region);
      const double b = lp_norm(gradient(u), spec.exponent, region);
      return std::pow(std::pow(a, spec.exponent) + std::pow(b, spec.exponent), 1.0 / spec.exponent);
    }
    case NormKind::Holder:
      return holder_seminorm(u, spec.exponent, region);
    case NormKind::H1:
      return h1_norm(u, region);
  }
  return 0.0;
}

MaximalFunction nontangential_max(const GridFunction& u, double N0) {
  const Grid& g = u.grid();
  require(!g.periodic(), ErrorKind::InvalidArgument, "nontangential maximal function needs a box grid");
  require(N0 > 1.0, ErrorKind::InvalidArgument, "cone aperture N0 must exceed 1");
  const int d = g.dim();

  MaximalFunction out{GridFunction(g, 1), {}, 0};
  std::vector<std::size_t> interior;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g.is_boundary(p)) {
      out.boundary.push_back(p);
    } else {
      interior.push_back(p);
    }
  }
  // Scan interior points by decreasing |u|; the first one inside the cone is the sup.
  std::vector<double> mag(g.size(), 0.0);
  for (std::size_t p : interior) mag[p] = magnitude(u, p);
  std::stable_sort(interior.begin(), interior.end(), [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });
  std::vector<double> dist(g.size(), 0.0);
  for (std::size_t p : interior) dist[p] = g.boundary_distance(p);

  for (std::size_t qb : out.boundary) {
    const Point Q = g.coords(qb);
    // Nearest interior point: clamp the index into [1, cells-1].
    Index near = g.index(qb);
    for (int k = 0; k < d; ++k) near[k] = std::clamp(near[k], 1, g.cells(k) - 1);
    const std::size_t pn = g.flat(near);
    const auto in_cone = [&](std::size_t p) {
      const Point x = g.coords(p);
      double r2 = 0.0;
      for (int k = 0; k < d; ++k) r2 += (x[k] - Q[k]) * (x[k] - Q[k]);
      const double lim = N0 * dist[p];
      return r2 <= lim * lim * (1.0 + 1e-12);
    };
    double best = mag[pn];
    for (std::size_t p : interior) {
      if (mag[p] <= best) break;
      if (in_cone(p)) {
        best = mag[p];
        break;
      }
    }
    if (!in_cone(pn) && std::none_of(interior.begin(), interior.end(), in_cone)) ++out.widened;
    out.values(qb, 0) = best;
  }
  return out;
}

double boundary_lp_norm(const GridFunction& u, double p) {
  const Grid& g = u.grid();
  require(!g.periodic(), ErrorKind::InvalidArgument, "boundary norm needs a box grid");
  const int d = g.dim();
  if (d == 1) return std::pow(std::pow(magnitude(u, 0), p) + std::pow(magnitude(u, g.size() - 1), p), 1.0 / p);
  double s = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) {
    const Index i = g.index(q);
    for (int k = 0; k < d; ++k) {
      if (i[k] != 0 && i[k] != g.cells(k)) continue;
      double w = 1.0;
      for (int j = 0; j < d; ++j) {
        if (j == k) continue;
        w *= (i[j] == 0 || i[j] == g.cells(j)) ? 0.5 * g.spacing(j) : g.spacing(j);
      }
      s += w * std::pow(magnitude(u, q), p);
    }
  }
  return std::pow(s, 1.0 / p);
}

namespace {

std::string shape_token(const Grid& g) {
  std::string s;
  for (int k = 0; k < g.dim(); ++k) {
    if (k) s += "x";
    s += std::to_string(g.points(k));
  }
  bool uniform = true;
  for (int k = 1; k < g.dim(); ++k) uniform = uniform && g.points(k) == g.points(0);
  return uniform ? std::to_string(g.points(0)) : s;
}

}  // namespace

void write_csv(std::ostream& os, const GridFunction& u) {
  const Grid& g = u.grid();
  os << "dim,n_per_axis,components\n";
  os << g.dim() << ',' << shape_token(g) << ',' << u.components() << '\n';
  char buf[32];
  for (std::size_t p = 0; p < g.size(); ++p) {
    for (int c = 0; c < u.components(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", u(p, c));
      if (c) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

GridFunction read_csv(std::istream& is, const Grid& grid) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)) && line == "dim,n_per_axis,components", ErrorKind::Io,
          "CSV grid function: missing header line");
  require(static_cast<bool>(std::getline(is, line)), ErrorKind::Io, "CSV grid function: missing shape line");
  std::istringstream shape(line);
  std::string dim_s, n_s, c_s;
  std::getline(shape, dim_s, ',');
  std::getline(shape, n_s, ',');
  std::getline(shape, c_s, ',');
  int dim = 0, ncomp = 0;
  try {
    dim = std::stoi(dim_s);
    ncomp = std::stoi(c_s);
  } catch (const std::exception&) {
    fail(ErrorKind::Io, "CSV grid function: malformed shape line '" + line + "'");
  }
  require(dim == grid.dim() && n_s == shape_token(grid), ErrorKind::DimensionMismatch,
          "CSV grid function shape does not match " + grid.describe());
  GridFunction u(grid, ncomp);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    require(static_cast<bool>(std::getline(is, line)), ErrorKind::Io, "CSV grid function: truncated at row " + std::to_string(p));
    std::istringstream row(line);
    std::string cell;
    for (int c = 0; c < ncomp; ++c) {
      require(static_cast<bool>(std::getline(row, cell, ',')), ErrorKind::Io, "CSV grid function: short row " + std::to_string(p));
      u(p, c) = std::strtod(cell.c_str(), nullptr);
    }
  }
  return u;
}

namespace {
constexpr char kMagic[4] = {'H', 'G', 'F', '1'};
}

void write_binary(std::ostream& os, const GridFunction& u) {
  const Grid& g = u.grid();
  os.write(kMagic, 4);
  const std::int32_t hdr[5] = {g.dim(), g.points(0), g.points(1), g.points(2), u.components()};
  os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  os.write(reinterpret_cast<const char*>(u.values().data()), static_cast<std::streamsize>(u.values().size() * sizeof(double)));
}

GridFunction read_binary(std::istream& is, const Grid& grid) {
  char magic[4];
  std::int32_t hdr[5];
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(hdr), sizeof hdr);
  require(static_cast<bool>(is) && std::equal(magic, magic + 4, kMagic), ErrorKind::Io, "binary grid function: bad header");
  require(hdr[0] == grid.dim() && hdr[1] == grid.points(0) && hdr[2] == grid.points(1) && hdr[3] == grid.points(2),
          ErrorKind::DimensionMismatch, "binary grid function shape does not match " + grid.describe());
  GridFunction u(grid, hdr[4]);
  is.read(reinterpret_cast<char*>(u.values().data()), static_cast<std::streamsize>(u.values().size() * sizeof(double)));
  require(static_cast<bool>(is), ErrorKind::Io, "binary grid function: truncated data");
  return u;
}

}  // namespace homog
