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

#include "homog/coefficients.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "homog/error.hpp"

namespace homog {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_keys(const std::string& family, const nlohmann::json& params, const std::set<std::string>& allowed) {
  require(params.is_object() || params.is_null(), ErrorKind::InvalidArgument, "family parameters must be an object");
  if (params.is_null()) return;
  for (const auto& [key, _] : params.items())
    require(allowed.count(key) > 0, ErrorKind::InvalidArgument, "unknown parameter '" + key + "' for family '" + family + "'");
}

double num(const nlohmann::json& params, const char* key, double fallback) {
  if (params.is_null() || !params.contains(key)) return fallback;
  const auto& v = params.at(key);
  require(v.is_number(), ErrorKind::InvalidArgument, std::string("parameter '") + key + "' must be a number");
  return v.get<double>();
}

int integer(const nlohmann::json& params, const char* key, int fallback) {
  if (params.is_null() || !params.contains(key)) return fallback;
  const auto& v = params.at(key);
  require(v.is_number_integer(), ErrorKind::InvalidArgument, std::string("parameter '") + key + "' must be an integer");
  return v.get<int>();
}

/// Number -> multiple of the identity pattern; array -> explicit block.
std::vector<double> block(const nlohmann::json& params, const char* key, std::size_t size, const std::vector<double>& identity,
                          double fallback) {
  std::vector<double> out(size, 0.0);
  if (params.is_null() || !params.contains(key)) {
    for (std::size_t k = 0; k < size; ++k) out[k] = fallback * identity[k];
    return out;
  }
  const auto& v = params.at(key);
  if (v.is_number()) {
    for (std::size_t k = 0; k < size; ++k) out[k] = v.get<double>() * identity[k];
    return out;
  }
  require(v.is_array() && v.size() == size, ErrorKind::InvalidArgument,
          std::string("parameter '") + key + "' must be a number or an array of " + std::to_string(size) + " numbers");
  for (std::size_t k = 0; k < size; ++k) {
    require(v[k].is_number(), ErrorKind::InvalidArgument, std::string("parameter '") + key + "' has a non-numeric entry");
    out[k] = v[k].get<double>();
  }
  return out;
}

std::vector<double> identity_A(int d, int m) {
  std::vector<double> I(static_cast<std::size_t>(m * m * d * d), 0.0);
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < m; ++a) I[static_cast<std::size_t>(((i * d + i) * m + a) * m + a)] = 1.0;
  return I;
}

std::vector<double> identity_V(int d, int m) {
  std::vector<double> I(static_cast<std::size_t>(m * m * d), 0.0);
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < m; ++a) I[static_cast<std::size_t>((i * m + a) * m + a)] = 1.0;
  return I;
}

std::vector<double> identity_c(int m) {
  std::vector<double> I(static_cast<std::size_t>(m * m), 0.0);
  for (int a = 0; a < m; ++a) I[static_cast<std::size_t>(a * m + a)] = 1.0;
  return I;
}

CoefficientField constant_field(std::vector<double> v) {
  return [v = std::move(v)](const Point&, double* out) { std::copy(v.begin(), v.end(), out); };
}

void dims(const nlohmann::json& params, int& d, int& m, int m_default, bool m_allowed) {
  d = integer(params, "d", 2);
  require(d >= 1 && d <= 3, ErrorKind::InvalidArgument, "family dimension d must be 1, 2 or 3");
  m = m_allowed ? integer(params, "m", m_default) : m_default;
  require(m >= 1 && m <= 4, ErrorKind::InvalidArgument, "family system size m must lie in [1, 4]");
}

std::vector<double> symbol_eigenvalues(const CoefficientSet& cs, const double* A) {
  const int d = cs.d, m = cs.m, n = d * m;
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) M(i * m + a, j * m + b) = A[((i * d + j) * m + a) * m + b];
  const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

template <class F>
void for_lattice(int d, int n, F&& f) {
  const int total = static_cast<int>(std::pow(n, d));
  for (int s = 0; s < total; ++s) {
    Point y{0.0, 0.0, 0.0};
    int r = s;
    for (int k = d - 1; k >= 0; --k) {
      y[k] = static_cast<double>(r % n) / n;
      r /= n;
    }
    f(y);
  }
}

double frob(const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += v[k] * v[k];
  return std::sqrt(s);
}

CoefficientSet finish(CoefficientSet cs) {
  // Constant blocks need no dense lattice.
  estimate_constants(cs, cs.family == "constant" ? 8 : 64);
  require(cs.mu > 0.0, ErrorKind::InvalidArgument,
          "family '" + cs.family + "' violates uniform ellipticity (minimum symbol eigenvalue " + std::to_string(cs.mu) + ")");
  return cs;
}

CoefficientSet make_constant(const nlohmann::json& params) {
  check_keys("constant", params, {"d", "m", "a", "v", "b", "c"});
  CoefficientSet cs;
  dims(params, cs.d, cs.m, 1, true);
  const int d = cs.d, m = cs.m;
  auto A = block(params, "a", static_cast<std::size_t>(m * m * d * d), identity_A(d, m), 1.0);
  auto V = block(params, "v", static_cast<std::size_t>(m * m * d), identity_V(d, m), 0.0);
  auto B = block(params, "b", static_cast<std::size_t>(m * m * d), identity_V(d, m), 0.0);
  auto c = block(params, "c", static_cast<std::size_t>(m * m), identity_c(m), 0.0);
  cs.family = "constant";
  cs.params = params.is_null() ? nlohmann::json::object() : params;
  bool sym = true;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          sym = sym && A[static_cast<std::size_t>(((i * d + j) * m + a) * m + b)] == A[static_cast<std::size_t>(((j * d + i) * m + b) * m + a)];
  cs.symmetric = sym;
  cs.has_lower_order = std::any_of(V.begin(), V.end(), [](double x) { return x != 0.0; }) ||
                       std::any_of(B.begin(), B.end(), [](double x) { return x != 0.0; }) ||
                       std::any_of(c.begin(), c.end(), [](double x) { return x != 0.0; });
  cs.A = constant_field(std::move(A));
  cs.V = constant_field(std::move(V));
  cs.B = constant_field(std::move(B));
  cs.c = constant_field(std::move(c));
  return finish(std::move(cs));
}

CoefficientSet make_laminate(const nlohmann::json& params) {
  check_keys("laminate", params, {"d", "profile", "base", "amp", "a_lo", "a_hi", "sharpness"});
  CoefficientSet cs;
  dims(params, cs.d, cs.m, 1, false);
  const int d = cs.d;
  std::string profile = "inv-cos";
  if (!params.is_null() && params.contains("profile")) {
    require(params.at("profile").is_string(), ErrorKind::InvalidArgument, "laminate profile must be a string");
    profile = params.at("profile").get<std::string>();
  }
  std::function<double(double)> a;
  if (profile == "inv-cos") {
    const double base = num(params, "base", 2.0), amp = num(params, "amp", 1.0);
    require(base > std::abs(amp), ErrorKind::InvalidArgument, "laminate inv-cos needs base > |amp|");
    a = [base, amp](double y) { return 1.0 / (base + amp * std::cos(kTwoPi * y)); };
  } else if (profile == "two-phase") {
    const double lo = num(params, "a_lo", 1.0), hi = num(params, "a_hi", 2.0), s = num(params, "sharpness", 40.0);
    require(lo > 0.0 && hi > 0.0, ErrorKind::InvalidArgument, "laminate two-phase needs positive a_lo and a_hi");
    require(s > 0.0, ErrorKind::InvalidArgument, "laminate two-phase needs sharpness > 0");
    // a_lo on [0, 1/2), a_hi on [1/2, 1), smoothed over a width ~ 1/(2 pi s).
    a = [lo, hi, s](double y) { return 0.5 * (lo + hi) - 0.5 * (hi - lo) * std::tanh(s * std::sin(kTwoPi * y)); };
  } else {
    fail(ErrorKind::InvalidArgument, "unknown laminate profile '" + profile + "' (expected inv-cos or two-phase)");
  }
  cs.family = "laminate";
  cs.params = params.is_null() ? nlohmann::json::object() : params;
  cs.symmetric = true;
  cs.A = [a, d](const Point& y, double* out) {
    std::fill(out, out + d * d, 0.0);
    const double v = a(y[0]);
    for (int i = 0; i < d; ++i) out[i * d + i] = v;
  };
  cs.V = constant_field(std::vector<double>(static_cast<std::size_t>(d), 0.0));
  cs.B = cs.V;
  cs.c = constant_field({0.0});
  return finish(std::move(cs));
}

CoefficientSet make_trig(const nlohmann::json& params) {
  check_keys("trig", params, {"d", "m", "alpha", "beta", "v", "b", "c"});
  CoefficientSet cs;
  dims(params, cs.d, cs.m, 1, true);
  const int d = cs.d, m = cs.m;
  const double alpha = num(params, "alpha", 2.0), beta = num(params, "beta", 0.5);
  const double v = num(params, "v", 0.0), b = num(params, "b", 0.0), c = num(params, "c", 0.0);
  require(alpha > std::abs(beta) * d, ErrorKind::InvalidArgument, "trig family needs alpha > |beta| * d for ellipticity");
  cs.family = "trig";
  cs.params = params.is_null() ? nlohmann::json::object() : params;
  cs.symmetric = true;
  cs.has_lower_order = v != 0.0 || b != 0.0 || c != 0.0;
  cs.A = [=](const Point& y, double* out) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += std::sin(kTwoPi * y[i]);
    const double val = alpha + beta * s;
    std::fill(out, out + m * m * d * d, 0.0);
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < m; ++a) out[((i * d + i) * m + a) * m + a] = val;
  };
  cs.V = [=](const Point& y, double* out) {
    std::fill(out, out + m * m * d, 0.0);
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < m; ++a) out[(i * m + a) * m + a] = v * std::cos(kTwoPi * y[i]);
  };
  cs.B = [=](const Point& y, double* out) {
    std::fill(out, out + m * m * d, 0.0);
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < m; ++a) out[(i * m + a) * m + a] = b * std::sin(kTwoPi * (y[i] + y[(i + 1) % d]));
  };
  cs.c = [=](const Point& y, double* out) {
    std::fill(out, out + m * m, 0.0);
    for (int a = 0; a < m; ++a) out[a * m + a] = c * std::cos(kTwoPi * y[0]);
  };
  return finish(std::move(cs));
}

CoefficientSet make_oscillating_potential(const nlohmann::json& params) {
  check_keys("oscillating-potential", params, {"d", "m", "v"});
  CoefficientSet cs;
  dims(params, cs.d, cs.m, 1, true);
  const int d = cs.d, m = cs.m;
  const double v = num(params, "v", 1.0);
  cs.family = "oscillating-potential";
  cs.params = params.is_null() ? nlohmann::json::object() : params;
  cs.symmetric = true;
  cs.has_lower_order = v != 0.0;
  cs.A = constant_field(identity_A(d, m));
  cs.V = [=](const Point& y, double* out) {
    std::fill(out, out + m * m * d, 0.0);
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < m; ++a) out[(i * m + a) * m + a] = v * std::cos(kTwoPi * y[i]);
  };
  cs.B = cs.V;
  cs.c = constant_field(std::vector<double>(static_cast<std::size_t>(m * m), 0.0));
  return finish(std::move(cs));
}

CoefficientSet make_system(const nlohmann::json& params) {
  check_keys("system", params, {"d", "alpha", "beta", "s", "t", "v", "b", "c"});
  CoefficientSet cs;
  dims(params, cs.d, cs.m, 2, false);
  const int d = cs.d, m = 2;
  const double alpha = num(params, "alpha", 2.0), beta = num(params, "beta", 0.25);
  const double s = num(params, "s", 0.5), t = num(params, "t", 0.25);
  const double v = num(params, "v", 0.0), b = num(params, "b", 0.0), c = num(params, "c", 0.0);
  require(alpha - std::abs(beta) * d - std::abs(t) > 0.0, ErrorKind::InvalidArgument,
          "system family needs alpha - |beta| * d - |t| > 0 for ellipticity");
  cs.family = "system";
  cs.params = params.is_null() ? nlohmann::json::object() : params;
  cs.symmetric = s == 0.0;
  cs.has_lower_order = v != 0.0 || b != 0.0 || c != 0.0;
  // Per-direction block a(y) I + s J + t S with J antisymmetric, S = diag(1, -1).
  cs.A = [=](const Point& y, double* out) {
    double sum = 0.0;
    for (int i = 0; i < d; ++i) sum += std::sin(kTwoPi * y[i]);
    const double a = alpha + beta * sum;
    const double blk[4] = {a + t, s, -s, a - t};
    std::fill(out, out + m * m * d * d, 0.0);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < 4; ++k) out[(i * d + i) * m * m + k] = blk[k];
  };
  cs.V = [=](const Point& y, double* out) {
    for (int i = 0; i < d; ++i) {
      const double w = v * std::cos(kTwoPi * y[i]);
      const double blk[4] = {w, 0.5 * w, 0.0, w};
      for (int k = 0; k < 4; ++k) out[i * m * m + k] = blk[k];
    }
  };
  cs.B = [=](const Point& y, double* out) {
    for (int i = 0; i < d; ++i) {
      const double w = b * std::sin(kTwoPi * (y[i] + y[(i + 1) % d]));
      const double blk[4] = {w, 0.0, 0.5 * w, w};
      for (int k = 0; k < 4; ++k) out[i * m * m + k] = blk[k];
    }
  };
  cs.c = [=](const Point& y, double* out) {
    const double w = c * std::cos(kTwoPi * y[0]);
    out[0] = w;
    out[1] = 0.5 * w;
    out[2] = -0.5 * w;
    out[3] = w;
  };
  return finish(std::move(cs));
}

}  // namespace

void CoefficientSet::evaluate(const Point& y, double* A_out, double* V_out, double* B_out, double* c_out) const {
  A(y, A_out);
  V(y, V_out);
  B(y, B_out);
  c(y, c_out);
}

std::vector<std::string> builtin_family_names() { return {"constant", "laminate", "trig", "oscillating-potential", "system"}; }

CoefficientSet builtin_family(const std::string& name, const nlohmann::json& params) {
  if (name == "constant") return make_constant(params);
  if (name == "laminate") return make_laminate(params);
  if (name == "trig") return make_trig(params);
  if (name == "oscillating-potential") return make_oscillating_potential(params);
  if (name == "system") return make_system(params);
  fail(ErrorKind::InvalidArgument, "unknown coefficient family '" + name + "'");
}

void estimate_constants(CoefficientSet& cs, int lattice) {
  const int d = cs.d, m = cs.m;
  std::vector<double> A(static_cast<std::size_t>(m * m * d * d)), V(static_cast<std::size_t>(m * m * d)),
      B(static_cast<std::size_t>(m * m * d)), c(static_cast<std::size_t>(m * m));
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, kap = 0.0;
  for_lattice(d, lattice, [&](const Point& y) {
    cs.evaluate(y, A.data(), V.data(), B.data(), c.data());
    const auto ev = symbol_eigenvalues(cs, A.data());
    lo = std::min(lo, ev[0]);
    hi = std::max(hi, ev[1]);
    kap = std::max({kap, frob(V.data(), V.size()), frob(B.data(), B.size()), frob(c.data(), c.size())});
  });
  cs.mu = lo;
  cs.mu_upper = hi;
  cs.kappa = kap;
  cs.tau = 1.0;
  if (kap > 0.0) cs.has_lower_order = true;
}

double check_ellipticity(const CoefficientSet& cs, int n_probe) {
  require(n_probe >= 8, ErrorKind::InvalidArgument, "ellipticity probe needs n_probe >= 8");
  std::vector<double> A(static_cast<std::size_t>(cs.m * cs.m * cs.d * cs.d));
  double margin = std::numeric_limits<double>::infinity();
  for_lattice(cs.d, n_probe, [&](const Point& y) {
    cs.A(y, A.data());
    margin = std::min(margin, symbol_eigenvalues(cs, A.data())[0] - cs.mu);
  });
  return margin;
}

CoefficientValidation validate(const CoefficientSet& cs) {
  CoefficientValidation r;
  const int d = cs.d, m = cs.m;
  constexpr int kLattice = 16;
  r.ellipticity_margin = check_ellipticity(cs, kLattice);
  if (!(cs.mu > 0.0)) r.problems.push_back("declared mu is not positive");
  if (r.ellipticity_margin < 0.0) r.problems.push_back("ellipticity margin is negative");

  const std::size_t nA = static_cast<std::size_t>(m * m * d * d), nV = static_cast<std::size_t>(m * m * d),
                    nc = static_cast<std::size_t>(m * m);
  std::vector<double> a0(nA), v0(nV), b0(nV), c0(nc), a1(nA), v1(nV), b1(nV), c1(nc);
  for_lattice(d, kLattice, [&](const Point& y) {
    cs.evaluate(y, a0.data(), v0.data(), b0.data(), c0.data());
    for (int k = 0; k < d; ++k) {
      Point z = y;
      z[k] += 1.0;
      cs.evaluate(z, a1.data(), v1.data(), b1.data(), c1.data());
      for (std::size_t q = 0; q < nA; ++q) r.periodicity_defect = std::max(r.periodicity_defect, std::abs(a1[q] - a0[q]));
      for (std::size_t q = 0; q < nV; ++q)
        r.periodicity_defect = std::max({r.periodicity_defect, std::abs(v1[q] - v0[q]), std::abs(b1[q] - b0[q])});
      for (std::size_t q = 0; q < nc; ++q) r.periodicity_defect = std::max(r.periodicity_defect, std::abs(c1[q] - c0[q]));
    }
    const double sup = std::max({frob(v0.data(), nV), frob(b0.data(), nV), frob(c0.data(), nc)});
    r.bound_excess = std::max(r.bound_excess, sup - cs.kappa);
    if (cs.symmetric)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
              r.symmetry_defect = std::max(r.symmetry_defect, std::abs(a0[static_cast<std::size_t>(((i * d + j) * m + a) * m + b)] -
                                                                       a0[static_cast<std::size_t>(((j * d + i) * m + b) * m + a)]));
  });
  if (r.periodicity_defect > 1e-12) r.problems.push_back("coefficients are not 1-periodic on the validation lattice");
  if (r.bound_excess > 0.0) r.problems.push_back("sup of V, B, c exceeds kappa");
  if (r.symmetry_defect > 1e-14) r.problems.push_back("declared symmetry a_ij^ab = a_ji^ba does not hold");
  r.ok = r.problems.empty();
  return r;
}

SampledCoefficients sample_on(const CoefficientSet& cs, const Grid& grid, double eps, const SampleOptions& opts) {
  require(eps > 0.0 && std::isfinite(eps), ErrorKind::InvalidArgument, "eps must be positive");
  require(grid.dim() == cs.d, ErrorKind::DimensionMismatch, "grid dimension differs from the coefficient dimension");
  const int d = cs.d, m = cs.m;
  // Constant coefficients do not oscillate, so no scale needs resolving.
  if (!grid.periodic() && !opts.override_guard && cs.family != "constant") {
    const double hmax = eps / opts.min_points_per_period;
    if (grid.max_spacing() > hmax * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "resolution guard: h = " << grid.max_spacing() << " exceeds eps/" << opts.min_points_per_period << " = " << hmax
         << "; use h <= " << hmax;
      fail(ErrorKind::ResolutionGuard, os.str());
    }
  }
  // Exact commensurate indexing where eps/h is an integer.
  int period[3] = {0, 0, 0};
  for (int k = 0; k < d; ++k) {
    const double r = eps / grid.spacing(k);
    const double ri = std::round(r);
    if (ri >= 1.0 && std::abs(r - ri) <= 1e-9 * ri) period[k] = static_cast<int>(ri);
  }
  SampledCoefficients s = SampledCoefficients::zeros(grid, m);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Index i = grid.index(p);
    const Point x = grid.coords(p);
    Point y{0.0, 0.0, 0.0};
    for (int k = 0; k < d; ++k) {
      if (period[k] > 0) {
        y[k] = static_cast<double>(i[k] % period[k]) / period[k];
      } else {
        const double t = x[k] / eps;
        y[k] = t - std::floor(t);
      }
    }
    cs.evaluate(y, &s.A(p, 0), &s.V(p, 0), &s.B(p, 0), &s.c(p, 0));
  }
  require(s.all_finite(), ErrorKind::InvalidArgument, "coefficient family produced a non-finite sample");
  return s;
}

CoefficientSet constant_set(int d, int m, std::vector<double> A, std::vector<double> V, std::vector<double> B, std::vector<double> c) {
  require(A.size() == static_cast<std::size_t>(m * m * d * d) && V.size() == static_cast<std::size_t>(m * m * d) &&
              B.size() == static_cast<std::size_t>(m * m * d) && c.size() == static_cast<std::size_t>(m * m),
          ErrorKind::DimensionMismatch, "constant coefficient blocks have the wrong sizes");
  nlohmann::json params = {{"d", d}, {"m", m}, {"a", A}, {"v", V}, {"b", B}, {"c", c}};
  return make_constant(params);
}

}  // namespace homog
