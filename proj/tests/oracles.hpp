#pragma once
// Brute-force reference computations used by the unit and acceptance tests.
// Each oracle is written independently of the library code it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nsopt/numerics.hpp"

namespace oracle {

using nsopt::Matrix;
using nsopt::Vector;

struct Min1d {
  double arg = 0.0;
  double value = 0.0;
  double step = 0.0;  // grid spacing of the final pass
};

// Evaluates f on `points` equally spaced nodes of [lo, hi], then repeats once
// on the two cells around the best node, staying inside [lo, hi]. Near a smooth
// minimum, rounding in f limits the argmin to about sqrt(eps) relative accuracy.
inline Min1d grid_min(const std::function<double(double)>& f, double lo, double hi, int points = 100001) {
  const double lo0 = lo, hi0 = hi;
  Min1d best{lo, f(lo), 0.0};
  for (int pass = 0; pass < 2; ++pass) {
    const double h = (hi - lo) / (points - 1);
    best.step = h;
    for (int i = 0; i < points; ++i) {
      const double u = lo + h * i;
      const double v = f(u);
      if (v < best.value) best = {u, v, h};
    }
    lo = std::max(lo0, best.arg - h);
    hi = std::min(hi0, best.arg + h);
  }
  return best;
}

// Separable prox: minimizes t g(u_i) + (u_i - x_i)^2 / 2 per coordinate over [lo_i, hi_i].
struct SeparableResult {
  Vector u;
  double value = 0.0;
  double step = 0.0;
};

inline SeparableResult separable_prox(const Vector& x, const std::function<double(std::size_t, double)>& g,
                                      const std::function<std::pair<double, double>(std::size_t)>& range) {
  SeparableResult r;
  r.u = Vector(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto [lo, hi] = range(i);
    const double xi = x[i];
    const Min1d m = grid_min([&](double u) { return g(i, u) + 0.5 * (u - xi) * (u - xi); }, lo, hi, 20001);
    r.u[i] = m.arg;
    r.value += m.value;
    r.step = std::max(r.step, m.step);
  }
  return r;
}

// Radial prox for a rotation-invariant g(u) = phi(|u|): the minimizer lies on
// the ray through x, so only the radius is searched.
inline SeparableResult radial_prox(const Vector& x, const std::function<double(double)>& phi, double r_max) {
  double nx = 0.0;
  for (double v : x) nx += v * v;
  nx = std::sqrt(nx);
  const Min1d m = grid_min([&](double r) { return phi(r) + 0.5 * (r - nx) * (r - nx); }, 0.0, r_max);
  SeparableResult out;
  out.u = Vector(x.size());
  if (nx > 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) out.u[i] = x[i] / nx * m.arg;
  }
  out.value = m.value;
  out.step = m.step;
  return out;
}

// Gaussian elimination with partial pivoting.
inline Vector solve_dense(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_dense needs a square system");
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (a(piv, c) == 0.0) throw std::runtime_error("singular system");
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(piv, j));
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
      b[r] -= f * b[c];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

// sum_{i=0..H} (x_i - x_ref)' Q (x_i - x_ref) along x_{i+1} = A x_i + B u_i.
inline double mpc_rollout_cost(const Matrix& a, const Matrix& b, const Matrix& q, const Vector& x0,
                               const Vector& x_ref, const Vector& u) {
  const std::size_t ns = a.rows();
  const std::size_t ni = b.cols();
  const std::size_t horizon = u.size() / ni;
  std::vector<double> x(x0.begin(), x0.end());
  auto stage = [&] {
    double c = 0.0;
    for (std::size_t r = 0; r < ns; ++r)
      for (std::size_t s = 0; s < ns; ++s) c += (x[r] - x_ref[r]) * q(r, s) * (x[s] - x_ref[s]);
    return c;
  };
  double cost = stage();
  for (std::size_t i = 0; i < horizon; ++i) {
    std::vector<double> next(ns, 0.0);
    for (std::size_t r = 0; r < ns; ++r) {
      for (std::size_t s = 0; s < ns; ++s) next[r] += a(r, s) * x[s];
      for (std::size_t c = 0; c < ni; ++c) next[r] += b(r, c) * u[i * ni + c];
    }
    x = next;
    cost += stage();
  }
  return cost;
}

// Central differences with h = 1e-6 max(1, |x_i|).
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x) {
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline double rel_error(const Vector& got, const Vector& want) {
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    d += (got[i] - want[i]) * (got[i] - want[i]);
    n += want[i] * want[i];
  }
  return std::sqrt(d) / std::max(1.0, std::sqrt(n));
}

// Momentum and smoothing recursions in long double.
inline long double momentum_ld(long double beta) { return 0.5L * (1.0L + std::sqrt(1.0L + 4.0L * beta * beta)); }

inline long double mu_next_ld(long double mu, long double beta, long double beta_next, long double a, long double b) {
  const long double q = (b * (a - 1.0L) + a) / (a - 1.0L);
  const long double r = beta_next / beta;
  return b * mu / (q * r * r - 1.0L);
}

// Largest eigenvalue of a symmetric matrix by shifted power iteration.
inline double lambda_max_power(const Matrix& m, int iters = 20000) {
  const std::size_t n = m.rows();
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(m(i, j));
    shift = std::max(shift, row);
  }
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i) v[i] += 1e-3 * static_cast<double>(i);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) w[i] += m(i, j) * v[j];
      w[i] += shift * v[i];
    }
    double nw = 0.0;
    for (double x : w) nw += x * x;
    nw = std::sqrt(nw);
    double rq = 0.0;
    for (std::size_t i = 0; i < n; ++i) rq += v[i] * w[i];
    lambda = rq - shift;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  return lambda;
}

}  // namespace oracle
